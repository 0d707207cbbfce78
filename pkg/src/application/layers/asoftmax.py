import numpy as np

from src.application.layers.linear import glorot_uniform
from src.core.abstractions.module import BaseModule
from src.core.exceptions import NumericError
from src.core.tensor import Tensor
from src.core.tensor import functional as F


def normalize_columns(W: Tensor) -> Tensor:
    """
    Нормировать столбцы матрицы на единичную длину.

    :raises NumericError: если есть нулевой столбец
    """
    norms = F.sqrt(F.sum(F.mul(W, W), axis=0, keepdims=True))
    if np.any(norms.data == 0.0):
        raise NumericError("Нулевой столбец весов классов в Asoftmax")
    return F.div(W, norms)


def asoftmax_logits(c: Tensor, class_weights: Tensor) -> Tensor:
    """
    Логиты Asoftmax при m = 1: ‖c‖·cos θ_j без смещения.

    :param c: Эмбеддинг (b или 1×b)
    :param class_weights: Матрица b×N, столбец на диктора
    :return: Логиты 1×N
    """
    row = F.reshape(c, (1, c.size)) if c.ndim != 2 else c
    return F.matmul(row, normalize_columns(class_weights))


class AngularSoftmax(BaseModule):
    """Классификатор дикторов с нормированными весами классов."""

    def __init__(self, embedding_dim: int, num_classes: int, rng: np.random.Generator):
        super().__init__()
        self.num_classes = num_classes
        self.W = self.register_parameter(
            "W", glorot_uniform(rng, embedding_dim, num_classes)
        )

    def forward(self, c: Tensor) -> Tensor:
        return asoftmax_logits(c, self.W)
