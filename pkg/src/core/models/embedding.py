from dataclasses import dataclass, field
from typing import List

import numpy as np

from src.core.exceptions import DataError


@dataclass
class CVector:
    """Эмбеддинг окна (d-vector или c-vector), выход bottleneck."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(self.values)):
            raise DataError("Эмбеддинг содержит nan или inf")

    @property
    def dim(self) -> int:
        return int(self.values.size)


@dataclass
class EmbeddingSet:
    """Эмбеддинги окон одной записи и их времена начала и конца (с)."""

    recording_id: str
    embeddings: np.ndarray
    starts: List[float] = field(default_factory=list)
    ends: List[float] = field(default_factory=list)

    def __post_init__(self):
        if self.embeddings.ndim != 2:
            raise DataError(
                f"{self.recording_id}: эмбеддинги должны быть N×d, "
                f"форма {self.embeddings.shape}"
            )
        if not len(self.starts) == len(self.ends) == self.embeddings.shape[0]:
            raise DataError(
                f"{self.recording_id}: {self.embeddings.shape[0]} эмбеддингов, "
                f"{len(self.starts)} начал и {len(self.ends)} концов окон"
            )

    @property
    def num_windows(self) -> int:
        return int(self.embeddings.shape[0])

    def times(self) -> List[tuple]:
        return list(zip(self.starts, self.ends))
