from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


@dataclass
class AffinityMatrix:
    """Симметричная матрица сходства N×N со значениями в [0, 1]."""

    S: np.ndarray
    refined_p: Optional[float] = None

    @property
    def size(self) -> int:
        return int(self.S.shape[0])


@dataclass
class ClusterResult:
    """Результат спектральной кластеризации."""

    labels: np.ndarray
    k: int
    eigenvalues: List[float] = field(default_factory=list)
