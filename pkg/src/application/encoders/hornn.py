from typing import Mapping, Sequence

import numpy as np

from src.application.inputs.experiment import HornnConfig
from src.application.layers.linear import Linear, glorot_uniform
from src.core.abstractions.encoder import BaseEncoder
from src.core.abstractions.module import BaseModule
from src.core.exceptions import ConfigError, DataError, DimensionError
from src.core.tensor import Tensor
from src.core.tensor import functional as F

RECURRENT_GAIN = 0.5


def hornn_recurrence(
    drive: Tensor, recurrent: Sequence[Tensor], offsets: Sequence[int]
) -> Tensor:
    """
    s(t) = ReLU(drive(t) + Σ_o s(t−o)·U_o), s(τ) = 0 до начала окна.

    Одна примитивная операция с обратным проходом во времени.

    :param drive: Входной вклад x(t)·Wx + b, T×s
    :param recurrent: Матрицы U_o (s×s) в порядке offsets
    :param offsets: Положительные смещения назад
    :return: Состояния T×s
    """
    T, s = drive.shape
    weights = [U.data for U in recurrent]
    pre = np.zeros((T, s))
    states = np.zeros((T, s))
    for t in range(T):
        z = drive.data[t].copy()
        for U, o in zip(weights, offsets):
            if t - o >= 0:
                z += states[t - o] @ U
        pre[t] = z
        states[t] = np.maximum(z, 0.0)

    def backward(g):
        d_drive = np.zeros_like(pre)
        d_recurrent = [np.zeros_like(U) for U in weights]
        d_states = g.copy()
        for t in range(T - 1, -1, -1):
            dz = d_states[t] * (pre[t] > 0)
            d_drive[t] = dz
            for i, (U, o) in enumerate(zip(weights, offsets)):
                if t - o >= 0:
                    d_recurrent[i] += np.outer(states[t - o], dz)
                    d_states[t - o] += dz @ U.T
        return (d_drive, *d_recurrent)

    return Tensor.from_op(states, (drive, *recurrent), backward, "hornn_recurrence")


class HornnLayer(BaseModule):
    """Один слой HORNN: рекуррентность по состояниям и линейная проекция."""

    def __init__(
        self,
        in_dim: int,
        state_dim: int,
        projection_dim: int,
        offsets: Sequence[int],
        rng: np.random.Generator,
    ):
        super().__init__()
        self.offsets = list(offsets)
        self.register_module("input", Linear(in_dim, state_dim, rng))
        for o in self.offsets:
            self.register_parameter(
                f"U{o}", glorot_uniform(rng, state_dim, state_dim, gain=RECURRENT_GAIN)
            )
        self.register_module(
            "projection", Linear(state_dim, projection_dim, rng, bias=False)
        )


def hornn_forward(
    features: Tensor, cfg: HornnConfig, params: Mapping[str, Tensor]
) -> Tensor:
    """
    Прямой проход HORNN (каузальный: выход в t зависит только от кадров ≤ t).

    :param features: Признаки T×f
    :param cfg: Конфигурация HORNN
    :param params: Параметры layer{i}.input.W/b, layer{i}.U{o},
        layer{i}.projection.W
    :return: T×projection_dim
    """
    if features.ndim != 2 or features.shape[0] == 0:
        raise DataError(f"HORNN: пустой или не двумерный вход {features.shape}")
    x = features
    for i in range(cfg.num_layers):
        prefix = f"layer{i}"
        W, b = params[f"{prefix}.input.W"], params[f"{prefix}.input.b"]
        if x.shape[1] != W.shape[0]:
            raise DimensionError(
                f"HORNN слой {i}: вход {x.shape} не согласован с W {W.shape}"
            )
        drive = F.add(F.matmul(x, W), b)
        recurrent = [params[f"{prefix}.U{o}"] for o in cfg.recurrence_offsets]
        states = hornn_recurrence(drive, recurrent, cfg.recurrence_offsets)
        x = F.matmul(states, params[f"{prefix}.projection.W"])
    return x


def hornn_recurrent_count(in_dim: int, state_dim: int, n_offsets: int) -> int:
    """Параметры рекуррентной части слоя: in·s + |offsets|·s² + s."""
    return in_dim * state_dim + n_offsets * state_dim * state_dim + state_dim


def hornn_param_count(cfg: HornnConfig) -> int:
    if cfg.input_dim is None:
        raise ConfigError("Для подсчёта параметров HORNN нужен input_dim")
    total, in_dim = 0, cfg.input_dim
    for _ in range(cfg.num_layers):
        total += hornn_recurrent_count(
            in_dim, cfg.state_dim, len(cfg.recurrence_offsets)
        )
        total += Linear.count(cfg.state_dim, cfg.projection_dim, bias=False)
        in_dim = cfg.projection_dim
    return total


class HornnEncoder(BaseEncoder):
    """Двухслойная HORNN с проекцией каждого слоя."""

    def __init__(self, cfg: HornnConfig, rng: np.random.Generator):
        super().__init__()
        if cfg.input_dim is None:
            raise ConfigError("HornnConfig.input_dim не задан")
        self.cfg = cfg
        in_dim = cfg.input_dim
        for i in range(cfg.num_layers):
            self.register_module(
                f"layer{i}",
                HornnLayer(
                    in_dim,
                    cfg.state_dim,
                    cfg.projection_dim,
                    cfg.recurrence_offsets,
                    rng,
                ),
            )
            in_dim = cfg.projection_dim

    @property
    def output_dim(self) -> int:
        return self.cfg.projection_dim

    def forward(self, features: Tensor) -> Tensor:
        return hornn_forward(features, self.cfg, self.named_parameters())
