from typing import Union

import numpy as np

from src.application.encoders.hornn import HornnEncoder, hornn_param_count
from src.application.encoders.tdnn import TdnnEncoder, tdnn_param_count
from src.application.inputs.experiment import HornnConfig, TdnnConfig
from src.core.abstractions.encoder import BaseEncoder


def param_count(cfg: Union[TdnnConfig, HornnConfig]) -> int:
    """Точное число обучаемых скаляров энкодера по его конфигурации."""
    if isinstance(cfg, TdnnConfig):
        return tdnn_param_count(cfg)
    return hornn_param_count(cfg)


def create_encoder(
    cfg: Union[TdnnConfig, HornnConfig], rng: np.random.Generator
) -> BaseEncoder:
    if isinstance(cfg, TdnnConfig):
        return TdnnEncoder(cfg, rng)
    return HornnEncoder(cfg, rng)


__all__ = [
    "HornnEncoder",
    "TdnnEncoder",
    "create_encoder",
    "hornn_param_count",
    "param_count",
    "tdnn_param_count",
]
