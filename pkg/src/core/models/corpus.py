from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from src.core.exceptions import DataError
from src.core.models.segments import Segment, SegmentList
from src.core.tensor import Tensor


@dataclass
class FeatureSequence:
    """Последовательность признаков одной записи с покадровыми метками."""

    recording_id: str
    features: np.ndarray
    labels: List[str]
    frame_period_s: float = 0.01

    def __post_init__(self):
        if self.features.ndim != 2:
            raise DataError(
                f"{self.recording_id}: признаки должны быть T×f, "
                f"форма {self.features.shape}"
            )
        if len(self.labels) != self.features.shape[0]:
            raise DataError(
                f"{self.recording_id}: {len(self.labels)} меток на "
                f"{self.features.shape[0]} кадров"
            )

    @property
    def num_frames(self) -> int:
        return int(self.features.shape[0])

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])

    def to_segments(self) -> SegmentList:
        """Эталонная разметка: серии одинаковых меток -> сегменты."""
        segments = []
        start = 0
        for t in range(1, self.num_frames + 1):
            if t == self.num_frames or self.labels[t] != self.labels[start]:
                segments.append(
                    Segment(
                        recording_id=self.recording_id,
                        start=round(start * self.frame_period_s, 3),
                        end=round(t * self.frame_period_s, 3),
                        speaker=self.labels[start],
                    )
                )
                start = t
        return SegmentList(segments)


@dataclass
class LabeledWindow:
    """Окно признаков; speaker_id задан только в режиме обучения."""

    features: Tensor
    speaker_id: Optional[int]
    recording_id: str
    start_frame: int
    frame_period_s: float = 0.01

    @property
    def num_frames(self) -> int:
        return int(self.features.shape[0])

    @property
    def start_s(self) -> float:
        return round(self.start_frame * self.frame_period_s, 3)

    @property
    def end_s(self) -> float:
        return round((self.start_frame + self.num_frames) * self.frame_period_s, 3)


@dataclass
class CorpusSplit:
    """Часть корпуса (train, dev или eval)."""

    name: str
    sequences: List[FeatureSequence] = field(default_factory=list)

    @property
    def speakers(self) -> List[str]:
        return sorted({label for seq in self.sequences for label in seq.labels})

    def reference(self) -> SegmentList:
        """Эталонная разметка всех записей части."""
        reference = SegmentList()
        for seq in self.sequences:
            reference.extend(seq.to_segments())
        return reference

    def get(self, recording_id: str) -> FeatureSequence:
        for seq in self.sequences:
            if seq.recording_id == recording_id:
                return seq
        raise DataError(f"Запись {recording_id} отсутствует в части {self.name}")


@dataclass
class Corpus:
    """Корпус с разбиением на части и общей размерностью признаков."""

    splits: Dict[str, CorpusSplit]
    feature_dim: int
    frame_period_s: float = 0.01

    def split(self, name: str) -> CorpusSplit:
        if name not in self.splits:
            raise DataError(
                f"Часть корпуса '{name}' отсутствует; доступны: {sorted(self.splits)}"
            )
        return self.splits[name]
