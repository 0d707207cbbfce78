import json
from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.core.exceptions import ConfigError

ENCODERS = ("tdnn", "hornn")


class StrictModel(BaseModel):
    """Базовая схема: неизвестные ключи отклоняются."""

    model_config = ConfigDict(extra="forbid")


class SynthConfig(StrictModel):
    """Параметры синтетического корпуса."""

    num_speakers: int = Field(20, ge=2, description="Дикторы обучающей части")
    dev_seen_speakers: int = Field(2, ge=0, description="Дикторы dev из train")
    dev_new_speakers: int = Field(2, ge=0, description="Новые дикторы dev")
    eval_speakers: int = Field(4, ge=1, description="Дикторы eval (не из train)")
    feature_dim: int = Field(20, ge=2)
    turn_frames_min: int = Field(300, ge=1)
    turn_frames_max: int = Field(800, ge=1)
    turns_per_recording: int = Field(8, ge=1)
    speakers_per_recording: int = Field(3, ge=1)
    train_recordings: int = Field(30, ge=1)
    dev_recordings: int = Field(4, ge=1)
    eval_recordings: int = Field(4, ge=1)
    sigma: float = Field(0.05, ge=0.0, description="Шум внутри диктора")
    rho: float = Field(0.9, ge=0.0, lt=1.0, description="Коэффициент AR(1)")
    min_angle_deg: float = Field(60.0, ge=0.0, le=180.0)
    max_rejections: int = Field(10000, ge=1)
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _check_ranges(self) -> "SynthConfig":
        if self.turn_frames_min > self.turn_frames_max:
            raise ValueError("turn_frames_min больше turn_frames_max")
        if self.dev_seen_speakers > self.num_speakers:
            raise ValueError("dev_seen_speakers больше num_speakers")
        if self.dev_seen_speakers + self.dev_new_speakers < 1:
            raise ValueError("В dev должен быть хотя бы один диктор")
        return self


class TdnnLayerConfig(StrictModel):
    context: List[int]
    out_dim: int = Field(ge=1)

    @model_validator(mode="after")
    def _check_context(self) -> "TdnnLayerConfig":
        if not self.context or self.context != sorted(set(self.context)):
            raise ValueError(f"Контекст должен быть возрастающим: {self.context}")
        symmetric = sorted(-c for c in self.context) == self.context
        if 0 not in self.context and not symmetric:
            raise ValueError(
                f"Контекст должен содержать 0 или быть симметричным: {self.context}"
            )
        return self


def _tdnn_layers(width: int, tap: int) -> List[TdnnLayerConfig]:
    return [
        TdnnLayerConfig(context=[-2, -1, 0, 1, 2], out_dim=width),
        TdnnLayerConfig(context=[-2, 0, 2], out_dim=width),
        TdnnLayerConfig(context=[-3, 0, 3], out_dim=width),
        TdnnLayerConfig(context=[0], out_dim=width),
        TdnnLayerConfig(context=[0], out_dim=tap),
    ]


class TdnnConfig(StrictModel):
    """Стек TDNN; выход пятого слоя подаётся на внимание."""

    input_dim: Optional[int] = Field(None, ge=1)
    layers: List[TdnnLayerConfig] = Field(default_factory=lambda: _tdnn_layers(64, 32))
    projection_dim: int = Field(32, ge=1)

    @model_validator(mode="after")
    def _check_tap(self) -> "TdnnConfig":
        if not self.layers:
            raise ValueError("TDNN должен содержать хотя бы один слой")
        if self.layers[-1].out_dim != self.projection_dim:
            raise ValueError(
                f"Последний слой TDNN ({self.layers[-1].out_dim}) "
                f"не совпадает с projection_dim ({self.projection_dim})"
            )
        return self

    @classmethod
    def full_scale(cls) -> "TdnnConfig":
        return cls(input_dim=40, layers=_tdnn_layers(512, 128), projection_dim=128)


class HornnConfig(StrictModel):
    """HORNN: ReLU-рекуррентность по состояниям t−1 и t−4 с проекцией."""

    input_dim: Optional[int] = Field(None, ge=1)
    num_layers: int = Field(2, ge=1)
    state_dim: int = Field(32, ge=1)
    projection_dim: int = Field(32, ge=1)
    recurrence_offsets: List[int] = Field(default_factory=lambda: [1, 4])

    @model_validator(mode="after")
    def _check_offsets(self) -> "HornnConfig":
        if not self.recurrence_offsets or any(
            o <= 0 for o in self.recurrence_offsets
        ):
            raise ValueError(
                f"Смещения рекуррентности должны быть положительными: "
                f"{self.recurrence_offsets}"
            )
        if len(set(self.recurrence_offsets)) != len(self.recurrence_offsets):
            raise ValueError("Смещения рекуррентности повторяются")
        return self

    @classmethod
    def full_scale(cls) -> "HornnConfig":
        return cls(input_dim=40, state_dim=256, projection_dim=128)


def penalty_pattern(
    heads: int, n_smooth: int, spiky: float = 1.0, smooth: float = 0.2
) -> List[float]:
    """
    Диагональ Λ по шаблону «острые головы, затем гладкие».

    :param heads: Число голов h
    :param n_smooth: Число гладких голов (обрезается до h)
    :param spiky: λ острых голов
    :param smooth: λ гладких голов
    :return: h значений λ
    """
    n_smooth = min(n_smooth, heads)
    return [spiky] * (heads - n_smooth) + [smooth] * n_smooth


class PenaltyConfig(StrictModel):
    """
    Штраф μ‖AᵀA − Λ‖²_F. Если lambdas не заданы, диагональ Λ строится
    по шаблону: preset "original": все λ=1; "modified": n_smooth гладких
    голов с smooth_lambda, остальные spiky_lambda.
    """

    mu: float = Field(0.1, ge=0.0)
    lambdas: Optional[List[float]] = None
    preset: Literal["original", "modified"] = "modified"
    n_smooth: int = Field(2, ge=0)
    spiky_lambda: float = Field(1.0, gt=0.0, le=1.0)
    smooth_lambda: float = Field(0.2, gt=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_lambdas(self) -> "PenaltyConfig":
        if self.lambdas is not None and any(
            not 0.0 < lam <= 1.0 for lam in self.lambdas
        ):
            raise ValueError(f"Каждое λ должно лежать в (0, 1]: {self.lambdas}")
        return self

    def resolve(self, heads: int) -> List[float]:
        """
        Диагональ Λ для слоя с заданным числом голов.

        :param heads: Число голов h
        :return: Список из h значений λ
        """
        if self.lambdas is not None:
            if len(self.lambdas) != heads:
                raise ConfigError(
                    f"Задано {len(self.lambdas)} значений λ для {heads} голов"
                )
            return list(self.lambdas)
        if self.preset == "original":
            return [1.0] * heads
        return penalty_pattern(
            heads, self.n_smooth, self.spiky_lambda, self.smooth_lambda
        )


class AttentionConfig(StrictModel):
    """Самовнимание первой ступени (в каждой системе)."""

    heads: int = Field(5, ge=1)
    hidden_dim: Optional[int] = Field(None, ge=1, description="d_a, по умолчанию n/2")
    penalty: PenaltyConfig = Field(default_factory=PenaltyConfig)


class CombinerConfig(StrictModel):
    """Топология объединения систем и bottleneck."""

    encoders: List[Literal["tdnn", "hornn"]] = Field(
        default_factory=lambda: ["tdnn", "hornn"]
    )
    system_heads: Dict[str, int] = Field(default_factory=dict)
    stage2_heads: Optional[int] = Field(None, ge=1)
    stage2_penalty: Optional[PenaltyConfig] = None
    fc_transform: Optional[bool] = None
    fc_dim: Optional[int] = Field(None, ge=1)
    fusion_dim: int = Field(64, ge=1)
    bottleneck_dim: int = Field(128, ge=1)

    @model_validator(mode="after")
    def _check_encoders(self) -> "CombinerConfig":
        if not self.encoders:
            raise ValueError("Нужна хотя бы одна система (k ≥ 1)")
        unknown = set(self.system_heads) - set(ENCODERS)
        if unknown:
            raise ValueError(f"Неизвестные системы в system_heads: {sorted(unknown)}")
        return self

    def heads_for(self, encoder: str, default: int) -> int:
        return self.system_heads.get(encoder, default)

    def resolved_fc_transform(self, topology: str) -> bool:
        """FC-преобразование: только consec1 и consec2, по умолчанию в consec2."""
        if topology not in ("consec1", "consec2"):
            return False
        if self.fc_transform is not None:
            return self.fc_transform
        return topology == "consec2"

    def resolved_stage2_heads(self, topology: str, attention_heads: int) -> int:
        """consec1: всегда одна голова; consec2: stage2_heads или h первой ступени."""
        if topology == "consec1":
            return 1
        if self.stage2_heads is not None:
            return self.stage2_heads
        return attention_heads

    def resolved_stage2_penalty(
        self, topology: str, first_stage: PenaltyConfig, k: int
    ) -> PenaltyConfig:
        """
        Штраф второй ступени.

        consec1: одна голова с λ = 1/k (μ из stage2_penalty, если задан);
        consec2: stage2_penalty или шаблон первой ступени.

        :param topology: Топология из имени системы
        :param first_stage: Штраф первой ступени
        :param k: Число объединяемых систем
        """
        if topology == "consec1":
            mu = (self.stage2_penalty or first_stage).mu
            return PenaltyConfig(mu=mu, lambdas=[1.0 / k])
        if self.stage2_penalty is not None:
            return self.stage2_penalty
        return first_stage.model_copy(update={"lambdas": None})


class TrainConfig(StrictModel):
    """Обучение: окна, оптимизатор, расписание."""

    window_frames: int = Field(200, ge=1)
    window_shift: int = Field(100, ge=1)
    learning_rate: float = Field(1e-3, ge=0.0)
    batch_size: int = Field(32, ge=1)
    epochs: int = Field(10, ge=0)
    pretrain_epochs: int = Field(2, ge=0)
    val_fraction: float = Field(0.1, ge=0.0, lt=1.0)
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _check_shift(self) -> "TrainConfig":
        if self.window_shift > self.window_frames:
            raise ValueError("window_shift должен быть не больше window_frames")
        return self


class ClusteringConfig(StrictModel):
    """Спектральная кластеризация и сетка порога для настройки на dev."""

    threshold_p: float = Field(0.5, gt=0.0, lt=1.0)
    threshold_grid: List[float] = Field(
        default_factory=lambda: [round(0.05 * i, 2) for i in range(1, 20)]
    )
    k_max: int = Field(10, ge=1)
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _check_grid(self) -> "ClusteringConfig":
        if not self.threshold_grid or any(
            not 0.0 < p < 1.0 for p in self.threshold_grid
        ):
            raise ValueError("Значения threshold_grid должны лежать в (0, 1)")
        return self


class ScoringConfig(StrictModel):
    collar: float = Field(0.25, ge=0.0)


class ExperimentConfig(StrictModel):
    """Полное описание эксперимента (один JSON-документ)."""

    seed: int = 0
    synth: SynthConfig = Field(default_factory=SynthConfig)
    tdnn: TdnnConfig = Field(default_factory=TdnnConfig)
    hornn: HornnConfig = Field(default_factory=HornnConfig)
    attention: AttentionConfig = Field(default_factory=AttentionConfig)
    pooling: Literal["attention", "stats"] = "attention"
    combiner: CombinerConfig = Field(default_factory=CombinerConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    clustering: ClusteringConfig = Field(default_factory=ClusteringConfig)
    scoring: ScoringConfig = Field(default_factory=ScoringConfig)
    systems: List[str] = Field(
        default_factory=lambda: ["tdnn", "hornn", "cvector:consec2"]
    )

    @model_validator(mode="after")
    def _fill_seeds(self) -> "ExperimentConfig":
        for section in (self.synth, self.train, self.clustering):
            if section.seed is None:
                section.seed = self.seed
        return self

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        """
        Разобрать и проверить конфигурацию.

        :param text: JSON-документ
        :return: ExperimentConfig
        :raises ConfigError: при ошибке схемы или согласованности
        """
        try:
            parsed = cls.model_validate_json(text)
        except ValidationError as e:
            raise ConfigError(f"Некорректная конфигурация эксперимента: {e}") from e

        from src.core.validation.config_validator import ConfigValidator

        ConfigValidator().validate_experiment(parsed).raise_for_errors()
        return parsed

    @classmethod
    def from_file(cls, path: Path) -> "ExperimentConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"Файл конфигурации не найден: {path}")
        return cls.from_json(path.read_text(encoding="utf-8"))

    def echo(self) -> Dict:
        """Конфигурация в виде словаря для заголовков чекпоинтов и манифестов."""
        return json.loads(self.model_dump_json())
