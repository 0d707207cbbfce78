from typing import Dict, List, Optional, Union

import numpy as np

from src.application.encoders import create_encoder
from src.application.inputs.experiment import ExperimentConfig, HornnConfig, TdnnConfig
from src.application.networks import EmbeddingNetwork
from src.core.abstractions.encoder import BaseEncoder
from src.core.logging import get_logger
from src.core.validation.config_validator import parse_system


class NetworkFactory:
    """Фабрика сетей эмбеддингов по конфигурации эксперимента."""

    def __init__(self, cfg: ExperimentConfig):
        """
        :param cfg: Конфигурация эксперимента
        """
        self.cfg = cfg
        self.logger = get_logger(__name__)

    def encoder_names(self, system: str) -> List[str]:
        """
        Энкодеры, входящие в систему.

        :param system: tdnn | hornn | cvector:<topology>
        :return: Имена энкодеров в порядке объединения
        """
        kind, value = parse_system(system)
        return [value] if kind == "dvector" else list(self.cfg.combiner.encoders)

    def encoder_config(
        self, name: str, feature_dim: int
    ) -> Union[TdnnConfig, HornnConfig]:
        section = self.cfg.tdnn if name == "tdnn" else self.cfg.hornn
        return section.model_copy(update={"input_dim": feature_dim})

    def create_encoder(
        self, name: str, feature_dim: int, rng: np.random.Generator
    ) -> BaseEncoder:
        return create_encoder(self.encoder_config(name, feature_dim), rng)

    def create(
        self,
        system: str,
        feature_dim: int,
        num_speakers: int,
        seed: Optional[int] = None,
    ) -> EmbeddingNetwork:
        """
        Создать сеть системы со случайной инициализацией.

        :param system: Имя системы
        :param feature_dim: Размерность входных признаков f
        :param num_speakers: Число обучающих дикторов
        :param seed: Зерно инициализации (по умолчанию cfg.seed)
        :return: EmbeddingNetwork
        """
        rng = np.random.default_rng(self.cfg.seed if seed is None else seed)
        encoders: Dict[str, BaseEncoder] = {
            name: self.create_encoder(name, feature_dim, rng)
            for name in self.encoder_names(system)
        }
        network = EmbeddingNetwork(system, encoders, self.cfg, num_speakers, rng)
        self.logger.info(
            f"Создана сеть {system}: {network.extractor_param_count()} параметров "
            f"экстрактора, эмбеддинг {network.embedding_dim}"
        )
        return network

    def param_count(self, system: str, feature_dim: int) -> int:
        """Число параметров экстрактора (без классификатора дикторов)."""
        return self.create(system, feature_dim, num_speakers=2).extractor_param_count()
