import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List

from src.core.exceptions import DataError


def to_ms(seconds: float) -> int:
    """Время в секундах -> целые миллисекунды."""
    return int(round(seconds * 1000.0))


@dataclass(frozen=True)
class Segment:
    """Речевой сегмент одного диктора."""

    recording_id: str
    start: float
    end: float
    speaker: str

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.end)):
            raise DataError(f"Нечисловые границы сегмента: {self}")
        if self.start < 0 or self.end <= self.start:
            raise DataError(
                f"Некорректный сегмент {self.recording_id} "
                f"[{self.start}, {self.end}) {self.speaker}"
            )

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass
class SegmentList:
    """Разметка диаризации (эталон или гипотеза)."""

    segments: List[Segment] = field(default_factory=list)

    def __iter__(self) -> Iterator[Segment]:
        return iter(self.segments)

    def __len__(self) -> int:
        return len(self.segments)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SegmentList):
            return NotImplemented
        return self.sorted().segments == other.sorted().segments

    def sorted(self) -> "SegmentList":
        return SegmentList(
            sorted(self.segments, key=lambda s: (s.recording_id, s.start, s.end))
        )

    def recordings(self) -> List[str]:
        return sorted({s.recording_id for s in self.segments})

    def for_recording(self, recording_id: str) -> "SegmentList":
        return SegmentList(
            [s for s in self.segments if s.recording_id == recording_id]
        ).sorted()

    def speakers(self) -> List[str]:
        return sorted({s.speaker for s in self.segments})

    def extend(self, other: "SegmentList") -> None:
        self.segments.extend(other.segments)


@dataclass
class SerReport:
    """Итог оценки speaker error rate."""

    scored_time_s: float
    speaker_error_time_s: float
    ser_percent: float
    mapping: Dict[str, Dict[str, str]] = field(default_factory=dict)
    per_recording: Dict[str, Dict[str, float]] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "scored_time": self.scored_time_s,
            "error_time": self.speaker_error_time_s,
            "ser": self.ser_percent,
            "mapping": self.mapping,
            "per_recording": self.per_recording,
        }
