"""
Многоголовый слой самовнимания и штрафы на разнообразие голов.

A = softmax_columns(tanh(H·W1)·W2), E = Aᵀ·H,
P = μ‖AᵀA − Λ‖²_F (Λ = I даёт исходный штраф).
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.application.inputs.experiment import PenaltyConfig
from src.application.layers.linear import glorot_uniform
from src.core.abstractions.module import BaseModule
from src.core.exceptions import ConfigError, DataError, DimensionError
from src.core.models.attention import AnnotationMatrix, HeadStats
from src.core.tensor import Tensor
from src.core.tensor import functional as F


@dataclass
class AttentionParams:
    """Веса слоя внимания: W1 (n×d_a) и W2 (d_a×h), без смещений."""

    W1: Tensor
    W2: Tensor

    def __post_init__(self):
        if (
            self.W1.ndim != 2
            or self.W2.ndim != 2
            or self.W1.shape[1] != self.W2.shape[0]
        ):
            raise DimensionError(
                f"Несовместимые веса внимания {self.W1.shape} и {self.W2.shape}"
            )

    @property
    def n(self) -> int:
        return int(self.W1.shape[0])

    @property
    def d_a(self) -> int:
        return int(self.W1.shape[1])

    @property
    def h(self) -> int:
        return int(self.W2.shape[1])


def stack_inputs(inputs: Union[Tensor, Sequence[Tensor]]) -> Tensor:
    """
    Собрать последовательность векторов (или блоков строк) в матрицу H.

    :raises DataError: для пустой последовательности
    """
    if isinstance(inputs, Tensor):
        if inputs.ndim != 2 or inputs.shape[0] == 0:
            raise DataError(f"Ожидается непустая матрица T×n, форма {inputs.shape}")
        return inputs
    if len(inputs) == 0:
        raise DataError("Пустая последовательность входов самовнимания")
    rows = [F.reshape(x, (1, x.size)) if x.ndim == 1 else x for x in inputs]
    return rows[0] if len(rows) == 1 else F.concat(rows, axis=0)


def compute_annotations(H: Tensor, params: AttentionParams) -> AnnotationMatrix:
    """
    Матрица внимания A = softmax_columns(tanh(H·W1)·W2).

    :param H: Входы T×n
    :param params: Веса внимания
    :return: AnnotationMatrix T×h
    """
    if H.ndim != 2 or H.shape[1] != params.n:
        raise DimensionError(
            f"Вход внимания {H.shape} не согласован с W1 {params.W1.shape}"
        )
    scores = F.matmul(F.tanh(F.matmul(H, params.W1)), params.W2)
    return AnnotationMatrix(F.softmax_columns(scores))


def apply_attention(annotations: AnnotationMatrix, H: Tensor) -> Tensor:
    """
    E = Aᵀ·H: строка i есть взвешенное столбцом aᵢ среднее строк H.

    :return: Tensor h×n
    """
    if annotations.num_frames != H.shape[0]:
        raise DimensionError(
            f"Число строк A {annotations.A.shape} и H {H.shape} не совпадает"
        )
    return F.matmul(F.transpose(annotations.A), H)


def penalty_modified(
    annotations: AnnotationMatrix, mu: float, lambdas: Sequence[float]
) -> Tensor:
    """
    μ‖AᵀA − Λ‖²_F с Λ = diag(lambdas).

    :raises ConfigError: если число λ не равно числу голов
    """
    if len(lambdas) != annotations.num_heads:
        raise ConfigError(
            f"Задано {len(lambdas)} значений λ для {annotations.num_heads} голов"
        )
    A = annotations.A
    gram = F.matmul(F.transpose(A), A)
    target = Tensor(np.diag(np.asarray(lambdas, dtype=np.float64)))
    return F.scale(F.frobenius_sq(F.sub(gram, target)), mu)


def penalty_original(annotations: AnnotationMatrix, mu: float) -> Tensor:
    """μ‖AᵀA − I‖²_F."""
    return penalty_modified(annotations, mu, [1.0] * annotations.num_heads)


def self_atten(
    inputs: Union[Tensor, Sequence[Tensor]],
    params: AttentionParams,
    penalty_cfg: PenaltyConfig,
) -> Tuple[Tensor, Tensor]:
    """
    Выход h-головного слоя самовнимания и его штраф.

    :param inputs: Векторы h(1..T) (или готовая матрица H)
    :param params: Веса внимания
    :param penalty_cfg: μ и диагональ Λ
    :return: (E h×n, P)
    """
    H = stack_inputs(inputs)
    annotations = compute_annotations(H, params)
    E = apply_attention(annotations, H)
    P = penalty_modified(annotations, penalty_cfg.mu, penalty_cfg.resolve(params.h))
    return E, P


def annotation_stats(
    annotations: Union[AnnotationMatrix, np.ndarray]
) -> List[HeadStats]:
    """
    Энтропия (в натах) и максимальный вес каждой головы.
    """
    A = annotations.A.data if isinstance(annotations, AnnotationMatrix) else annotations
    stats = []
    for head in range(A.shape[1]):
        column = A[:, head]
        nonzero = column[column > 0]
        entropy = float(-np.sum(nonzero * np.log(nonzero)))
        stats.append(
            HeadStats(head=head, entropy=entropy, max_weight=float(column.max()))
        )
    return stats


def penalty_curve(
    a: np.ndarray, lambdas: Sequence[float], mu: float = 1.0
) -> np.ndarray:
    """
    P(λ) для одного фиксированного вектора внимания: μ(aᵀa − λ)².

    :param a: Вектор внимания длины T
    :param lambdas: Точки λ
    :param mu: Вес штрафа
    :return: Значения штрафа
    """
    column = AnnotationMatrix(Tensor(np.asarray(a, dtype=np.float64).reshape(-1, 1)))
    return np.array([penalty_modified(column, mu, [lam]).item() for lam in lambdas])


class SelfAttentiveLayer(BaseModule):
    """Обучаемый слой самовнимания со своим штрафом."""

    def __init__(
        self,
        input_dim: int,
        heads: int,
        penalty: PenaltyConfig,
        rng: np.random.Generator,
        hidden_dim: Optional[int] = None,
    ):
        """
        :param input_dim: Размерность входа n
        :param heads: Число голов h
        :param penalty: Настройки штрафа
        :param rng: Генератор для инициализации
        :param hidden_dim: d_a (по умолчанию n/2)
        """
        super().__init__()
        hidden_dim = hidden_dim or max(1, input_dim // 2)
        self.penalty = penalty
        self.lambdas = penalty.resolve(heads)
        self.W1 = self.register_parameter(
            "W1", glorot_uniform(rng, input_dim, hidden_dim)
        )
        self.W2 = self.register_parameter("W2", glorot_uniform(rng, hidden_dim, heads))

    @property
    def params(self) -> AttentionParams:
        return AttentionParams(self.W1, self.W2)

    @property
    def heads(self) -> int:
        return int(self.W2.shape[1])

    @property
    def input_dim(self) -> int:
        return int(self.W1.shape[0])

    def forward(
        self, inputs: Union[Tensor, Sequence[Tensor]]
    ) -> Tuple[Tensor, Tensor, AnnotationMatrix]:
        """
        :return: (E h×n, штраф P, матрица внимания)
        """
        H = stack_inputs(inputs)
        annotations = compute_annotations(H, self.params)
        E = apply_attention(annotations, H)
        P = penalty_modified(annotations, self.penalty.mu, self.lambdas)
        return E, P, annotations

    @staticmethod
    def count(input_dim: int, heads: int, hidden_dim: Optional[int] = None) -> int:
        hidden_dim = hidden_dim or max(1, input_dim // 2)
        return input_dim * hidden_dim + hidden_dim * heads
