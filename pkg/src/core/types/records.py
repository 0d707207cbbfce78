from typing import Any, Dict, List, TypedDict


class LossTraceRow(TypedDict):
    """Строка журнала обучения."""

    epoch: int
    train_loss: float
    val_acc: float


class AnnotationRow(TypedDict):
    """Вес одного кадра в одной голове внимания."""

    window_id: int
    head: int
    frame: int
    weight: float


class SweepRow(TypedDict):
    """Сводка по голове для одного значения λ."""

    lam: float
    head: int
    mean_entropy: float
    mean_max_weight: float


class WindowLabelRow(TypedDict):
    """Метка кластера одного окна."""

    recording_id: str
    window_id: int
    start: float
    end: float
    label: str


class CheckpointHeader(TypedDict):
    """JSON-заголовок чекпоинта."""

    format: str
    system: str
    input_dim: int
    param_count: int
    speakers: List[str]
    tensors: List[str]
    config: Dict[str, Any]
