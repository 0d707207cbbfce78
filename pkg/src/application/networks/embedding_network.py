from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.application.combiners import (
    bottleneck,
    combine_consec_fc,
    fc_transform,
    flatten_systems,
    stack_heads,
    stack_systems,
)
from src.application.inputs.experiment import ExperimentConfig
from src.application.layers.asoftmax import AngularSoftmax
from src.application.layers.attention import SelfAttentiveLayer
from src.application.layers.linear import Linear
from src.application.layers.pooling import StatisticsPooling
from src.core.abstractions.encoder import BaseEncoder
from src.core.abstractions.module import BaseModule
from src.core.exceptions import ConfigError
from src.core.models.attention import AnnotationMatrix
from src.core.tensor import Tensor
from src.core.validation.config_validator import parse_system


@dataclass
class EmbeddingOutput:
    """Эмбеддинг окна, штрафы всех слоёв внимания и их матрицы внимания."""

    embedding: Tensor
    penalties: List[Tensor] = field(default_factory=list)
    annotations: Dict[str, AnnotationMatrix] = field(default_factory=dict)


class EmbeddingNetwork(BaseModule):
    """
    Экстрактор d-vector (одна система) или c-vector (k систем) с угловым
    классификатором дикторов поверх bottleneck.

    Имена параметров: <encoder>_encoder.*, <encoder>_attention.*,
    <encoder>_fc.*, joint_attention.*, stage2_attention.*, fusion.*,
    bottleneck.*, classifier.*
    """

    def __init__(
        self,
        system: str,
        encoders: Dict[str, BaseEncoder],
        cfg: ExperimentConfig,
        num_speakers: int,
        rng: np.random.Generator,
    ):
        """
        :param system: tdnn | hornn | cvector:<topology>
        :param encoders: Энкодеры по имени в порядке объединения
        :param cfg: Конфигурация эксперимента
        :param num_speakers: Число классов дикторов
        :param rng: Генератор для инициализации
        """
        super().__init__()
        kind, value = parse_system(system)
        self.system = system
        self.kind = kind
        self.topology: Optional[str] = value if kind == "cvector" else None
        self.encoders = dict(encoders)
        for name, encoder in self.encoders.items():
            self.register_module(f"{name}_encoder", encoder)

        attention = cfg.attention
        combiner = cfg.combiner
        self.attention_layers: Dict[str, SelfAttentiveLayer] = {}
        self.fc_layers: Dict[str, Linear] = {}
        self.pooling: Optional[StatisticsPooling] = None
        self.joint_attention: Optional[SelfAttentiveLayer] = None
        self.stage2: Optional[SelfAttentiveLayer] = None
        self.fusion: Optional[Linear] = None

        if kind == "dvector":
            if len(self.encoders) != 1:
                raise ConfigError(
                    f"{system}: d-vector строится ровно на одном энкодере"
                )
            name, encoder = next(iter(self.encoders.items()))
            if cfg.pooling == "stats":
                self.pooling = StatisticsPooling(encoder.output_dim)
                pooled_dim = 2 * encoder.output_dim
            else:
                heads = combiner.heads_for(name, attention.heads)
                self._add_attention(name, encoder.output_dim, heads, cfg, rng)
                pooled_dim = heads * encoder.output_dim
        elif self.topology == "simultaneous":
            widths = {e.output_dim for e in self.encoders.values()}
            if len(widths) > 1:
                raise ConfigError(f"simultaneous: разные размерности систем {widths}")
            n = widths.pop()
            self.joint_attention = SelfAttentiveLayer(
                n, attention.heads, attention.penalty, rng, attention.hidden_dim
            )
            self.register_module("joint_attention", self.joint_attention)
            pooled_dim = attention.heads * n
        else:
            pooled_dim = self._build_consecutive(cfg, rng)

        self.bottleneck = Linear(pooled_dim, combiner.bottleneck_dim, rng)
        self.register_module("bottleneck", self.bottleneck)
        self.classifier = AngularSoftmax(combiner.bottleneck_dim, num_speakers, rng)
        self.register_module("classifier", self.classifier)

    def _add_attention(
        self, name: str, n: int, heads: int, cfg: ExperimentConfig, rng
    ) -> None:
        layer = SelfAttentiveLayer(
            n, heads, cfg.attention.penalty, rng, cfg.attention.hidden_dim
        )
        self.attention_layers[name] = layer
        self.register_module(f"{name}_attention", layer)

    def _build_consecutive(self, cfg: ExperimentConfig, rng) -> int:
        attention, combiner = cfg.attention, cfg.combiner
        heads = {}
        widths = {}
        use_fc = combiner.resolved_fc_transform(self.topology)
        first_width = next(iter(self.encoders.values())).output_dim
        for name, encoder in self.encoders.items():
            heads[name] = combiner.heads_for(name, attention.heads)
            self._add_attention(name, encoder.output_dim, heads[name], cfg, rng)
            widths[name] = encoder.output_dim
            if use_fc:
                m = combiner.fc_dim or first_width
                self.fc_layers[name] = Linear(encoder.output_dim, m, rng, bias=False)
                self.register_module(f"{name}_fc", self.fc_layers[name])
                widths[name] = m

        if self.topology == "consec_fc":
            joined = sum(heads[name] * widths[name] for name in self.encoders)
            self.fusion = Linear(joined, combiner.fusion_dim, rng)
            self.register_module("fusion", self.fusion)
            return combiner.fusion_dim

        if len(set(widths.values())) > 1:
            raise ConfigError(f"{self.topology}: разные размерности систем {widths}")
        width = next(iter(widths.values()))
        k = len(self.encoders)
        stage2_heads = combiner.resolved_stage2_heads(self.topology, attention.heads)
        stage2_penalty = combiner.resolved_stage2_penalty(
            self.topology, attention.penalty, k
        )
        if self.topology == "consec1":
            if len(set(heads.values())) > 1:
                raise ConfigError(f"consec1: разное число голов {heads}")
            stage2_input = next(iter(heads.values())) * width
        else:
            stage2_input = width
        self.stage2 = SelfAttentiveLayer(
            stage2_input, stage2_heads, stage2_penalty, rng
        )
        self.register_module("stage2_attention", self.stage2)
        return stage2_heads * stage2_input

    @property
    def embedding_dim(self) -> int:
        return self.bottleneck.out_dim

    def embed(self, features: Tensor) -> EmbeddingOutput:
        """
        Прямой проход до bottleneck.

        :param features: Окно признаков T×f
        :return: EmbeddingOutput с эмбеддингом 1×bottleneck_dim
        """
        outputs = {name: enc.forward(features) for name, enc in self.encoders.items()}
        result = EmbeddingOutput(embedding=None)

        if self.pooling is not None:
            pooled, _, _ = self.pooling.forward(next(iter(outputs.values())))
        elif self.kind == "dvector":
            name, H = next(iter(outputs.items()))
            pooled = self._attend(name, self.attention_layers[name], H, result)
        elif self.joint_attention is not None:
            H = stack_systems(list(outputs.values()))
            pooled = self._attend("joint", self.joint_attention, H, result)
        else:
            es = []
            for name, H in outputs.items():
                E = self._attend(name, self.attention_layers[name], H, result)
                if name in self.fc_layers:
                    E = fc_transform(E, self.fc_layers[name].W)
                es.append(E)
            if self.topology == "consec_fc":
                pooled = combine_consec_fc(es, self.fusion.W, self.fusion.b)
            elif self.topology == "consec1":
                pooled = self._attend(
                    "stage2", self.stage2, flatten_systems(es), result
                )
            else:
                pooled = self._attend("stage2", self.stage2, stack_heads(es), result)

        result.embedding = bottleneck(pooled, self.bottleneck.W, self.bottleneck.b)
        return result

    @staticmethod
    def _attend(
        name: str, layer: SelfAttentiveLayer, H: Tensor, result: EmbeddingOutput
    ) -> Tensor:
        E, P, annotations = layer.forward(H)
        result.penalties.append(P)
        result.annotations[name] = annotations
        return E

    def logits(self, features: Tensor) -> Tuple[Tensor, EmbeddingOutput]:
        """
        Логиты Asoftmax и промежуточный выход.

        :param features: Окно признаков T×f
        :return: (логиты 1×N, EmbeddingOutput)
        """
        output = self.embed(features)
        return self.classifier.forward(output.embedding), output

    def extractor_param_count(self) -> int:
        """Параметры экстрактора эмбеддингов без классификатора."""
        return self.param_count() - self.classifier.param_count()
