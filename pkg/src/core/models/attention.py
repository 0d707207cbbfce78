from dataclasses import dataclass

from src.core.tensor import Tensor


@dataclass
class AnnotationMatrix:
    """Матрица внимания A (T×h или kT×h), столбцы суммируются в 1."""

    A: Tensor

    @property
    def num_frames(self) -> int:
        return int(self.A.shape[0])

    @property
    def num_heads(self) -> int:
        return int(self.A.shape[1])


@dataclass
class HeadStats:
    """Статистика одного столбца матрицы внимания."""

    head: int
    entropy: float
    max_weight: float
