from typing import Optional

import numpy as np

from src.core.abstractions.module import BaseModule
from src.core.tensor import Tensor
from src.core.tensor import functional as F


def glorot_uniform(
    rng: np.random.Generator, fan_in: int, fan_out: int, gain: float = 1.0
) -> np.ndarray:
    """
    Равномерная инициализация в ±√(6/(fan_in+fan_out)).

    :param rng: Генератор случайных чисел
    :param fan_in: Число входов
    :param fan_out: Число выходов
    :param gain: Множитель (0.5 для рекуррентных матриц)
    :return: Матрица fan_in×fan_out
    """
    limit = gain * np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class Linear(BaseModule):
    """Аффинный слой x·W + b для строк x."""

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        rng: np.random.Generator,
        bias: bool = True,
    ):
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.W = self.register_parameter("W", glorot_uniform(rng, in_dim, out_dim))
        self.b: Optional[Tensor] = (
            self.register_parameter("b", np.zeros((1, out_dim))) if bias else None
        )

    def forward(self, x: Tensor) -> Tensor:
        out = F.matmul(x, self.W)
        return out if self.b is None else F.add(out, self.b)

    @staticmethod
    def count(in_dim: int, out_dim: int, bias: bool = True) -> int:
        return in_dim * out_dim + (out_dim if bias else 0)
