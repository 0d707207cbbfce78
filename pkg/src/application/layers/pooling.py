from typing import Tuple

from src.core.abstractions.module import BaseModule
from src.core.tensor import Tensor
from src.core.tensor import functional as F

STD_FLOOR = 1e-8


class StatisticsPooling(BaseModule):
    """Базовое объединение по кадрам: среднее и стандартное отклонение (1×2n)."""

    def __init__(self, input_dim: int):
        super().__init__()
        self.input_dim = input_dim

    def forward(self, H: Tensor) -> Tuple[Tensor, None, None]:
        mean = F.mean(H, axis=0, keepdims=True)
        centered = F.sub(H, mean)
        variance = F.mean(F.mul(centered, centered), axis=0, keepdims=True)
        std = F.sqrt(F.add(variance, STD_FLOOR))
        return F.concat([mean, std], axis=1), None, None
