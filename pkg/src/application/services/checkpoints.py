from pathlib import Path
from typing import List, Tuple

from src.application.factories import NetworkFactory
from src.application.inputs.experiment import ExperimentConfig
from src.application.networks import EmbeddingNetwork
from src.core.exceptions import ConfigError
from src.core.logging import get_logger
from src.core.types import CheckpointHeader
from src.core.utils.json import dumps_json
from src.infra.storage.checkpoint import load_checkpoint, save_checkpoint

logger = get_logger(__name__)


def save_network(
    path: Path,
    network: EmbeddingNetwork,
    cfg: ExperimentConfig,
    speakers: List[str],
    input_dim: int,
) -> None:
    """Сохранить сеть вместе с эхо конфигурации и списком дикторов."""
    header: CheckpointHeader = {
        "format": "",
        "system": network.system,
        "input_dim": input_dim,
        "param_count": network.extractor_param_count(),
        "speakers": list(speakers),
        "tensors": [],
        "config": cfg.echo(),
    }
    save_checkpoint(path, header, network.state_dict())


def load_network(
    path: Path,
) -> Tuple[EmbeddingNetwork, CheckpointHeader, ExperimentConfig]:
    """
    Восстановить сеть из чекпоинта по сохранённой конфигурации.

    :raises ConfigError: если параметры не соответствуют конфигурации
    """
    header, state = load_checkpoint(path)
    cfg = ExperimentConfig.from_json(dumps_json(header["config"]))
    network = NetworkFactory(cfg).create(
        header["system"], int(header["input_dim"]), len(header["speakers"])
    )
    network.load_state_dict(state)
    logger.info(f"Загружена сеть {header['system']} из {path}")
    return network, header, cfg


def init_encoder_from(network: EmbeddingNetwork, name: str, path: Path) -> int:
    """
    Перенести параметры энкодера name из чекпоинта (обычно d-vector).

    :return: Число перенесённых тензоров
    :raises ConfigError: если энкодера нет в сети или в чекпоинте
    """
    if name not in network.encoders:
        raise ConfigError(f"В системе {network.system} нет энкодера {name}")
    _, state = load_checkpoint(path)
    prefix = f"{name}_encoder."
    subset = {k: v for k, v in state.items() if k.startswith(prefix)}
    if not subset:
        raise ConfigError(f"В чекпоинте {path} нет параметров энкодера {name}")
    expected = {k for k in network.named_parameters() if k.startswith(prefix)}
    if set(subset) != expected:
        raise ConfigError(
            f"Параметры {name} в чекпоинте {path} не совпадают с конфигурацией сети"
        )
    network.load_state_dict(subset, strict=False)
    logger.info(f"{network.system}: энкодер {name} инициализирован из {path}")
    return len(subset)
