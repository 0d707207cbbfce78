from src.core.types.records import (
    AnnotationRow,
    CheckpointHeader,
    LossTraceRow,
    SweepRow,
    WindowLabelRow,
)

__all__ = [
    "AnnotationRow",
    "CheckpointHeader",
    "LossTraceRow",
    "SweepRow",
    "WindowLabelRow",
]
