from typing import Mapping, Sequence

import numpy as np

from src.application.inputs.experiment import TdnnConfig
from src.application.layers.linear import Linear
from src.core.abstractions.encoder import BaseEncoder
from src.core.exceptions import ConfigError, DataError, DimensionError
from src.core.tensor import Tensor
from src.core.tensor import functional as F


def splice_frames(x: Tensor, offsets: Sequence[int]) -> Tensor:
    """
    Склейка кадров со смещениями; края дополняются повтором крайнего кадра,
    поэтому длина T сохраняется.

    :param x: Последовательность T×d
    :param offsets: Смещения контекста
    :return: T×(len(offsets)·d), строка t = [x(t+o₁), x(t+o₂), ...]
    """
    T = x.shape[0]
    index = np.clip(np.arange(T)[:, None] + np.asarray(offsets)[None, :], 0, T - 1)
    spliced = x.data[index].reshape(T, -1)

    def backward(g):
        grad = np.zeros_like(x.data)
        np.add.at(grad, index, g.reshape(T, len(offsets), -1))
        return (grad,)

    return Tensor.from_op(spliced, (x,), backward, "splice")


def tdnn_forward(
    features: Tensor, cfg: TdnnConfig, params: Mapping[str, Tensor]
) -> Tensor:
    """
    Прямой проход TDNN: для каждого слоя склейка контекста, аффинное
    преобразование и ReLU. Выход последнего слоя (после активации)
    подаётся на внимание.

    :param features: Признаки T×f
    :param cfg: Конфигурация TDNN
    :param params: Параметры layer{i}.W, layer{i}.b
    :return: T×projection_dim
    """
    if features.ndim != 2 or features.shape[0] == 0:
        raise DataError(f"TDNN: пустой или не двумерный вход {features.shape}")
    x = features
    for i, layer in enumerate(cfg.layers):
        spliced = splice_frames(x, layer.context)
        W, b = params[f"layer{i}.W"], params[f"layer{i}.b"]
        if spliced.shape[1] != W.shape[0]:
            raise DimensionError(
                f"TDNN слой {i}: вход {spliced.shape} не согласован с W {W.shape}"
            )
        x = F.relu(F.add(F.matmul(spliced, W), b))
    return x


def tdnn_param_count(cfg: TdnnConfig) -> int:
    """Σ (|контекст|·вход + 1)·выход по слоям."""
    if cfg.input_dim is None:
        raise ConfigError("Для подсчёта параметров TDNN нужен input_dim")
    total, in_dim = 0, cfg.input_dim
    for layer in cfg.layers:
        total += Linear.count(len(layer.context) * in_dim, layer.out_dim)
        in_dim = layer.out_dim
    return total


class TdnnEncoder(BaseEncoder):
    """TDNN в духе x-vector с отводом после пятого слоя."""

    def __init__(self, cfg: TdnnConfig, rng: np.random.Generator):
        super().__init__()
        if cfg.input_dim is None:
            raise ConfigError("TdnnConfig.input_dim не задан")
        self.cfg = cfg
        in_dim = cfg.input_dim
        for i, layer in enumerate(cfg.layers):
            self.register_module(
                f"layer{i}", Linear(len(layer.context) * in_dim, layer.out_dim, rng)
            )
            in_dim = layer.out_dim

    @property
    def output_dim(self) -> int:
        return self.cfg.projection_dim

    def forward(self, features: Tensor) -> Tensor:
        return tdnn_forward(features, self.cfg, self.named_parameters())

    def receptive_field(self) -> tuple:
        """Суммарный контекст (слева, справа) в кадрах."""
        left = sum(-min(layer.context) for layer in self.cfg.layers)
        right = sum(max(layer.context) for layer in self.cfg.layers)
        return left, right
