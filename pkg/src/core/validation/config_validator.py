from typing import TYPE_CHECKING, List

from src.core.exceptions import ConfigError
from src.core.logging import get_logger
from src.core.models.validation import ConfigCheckResult

if TYPE_CHECKING:
    from src.application.inputs.experiment import ExperimentConfig

DVECTOR_SYSTEMS = ("tdnn", "hornn")
TOPOLOGIES = ("simultaneous", "consec1", "consec2", "consec_fc")


def parse_system(name: str) -> tuple:
    """
    Разобрать имя системы.

    :param name: tdnn | hornn | cvector:<topology>
    :return: ("dvector", encoder) или ("cvector", topology)
    :raises ConfigError: для неизвестного имени или топологии
    """
    if name in DVECTOR_SYSTEMS:
        return "dvector", name
    if name.startswith("cvector:"):
        topology = name.split(":", 1)[1]
        if topology in TOPOLOGIES:
            return "cvector", topology
        raise ConfigError(
            f"Неизвестная топология '{topology}'. Доступные: {', '.join(TOPOLOGIES)}"
        )
    raise ConfigError(
        f"Неизвестная система '{name}'. Доступные: tdnn, hornn, cvector:<topology>"
    )


class ConfigValidator:
    """Перекрёстные проверки конфигурации эксперимента."""

    def __init__(self):
        self.logger = get_logger(__name__)

    def validate_experiment(self, cfg: "ExperimentConfig") -> ConfigCheckResult:
        """
        Проверить согласованность разделов конфигурации.
        :param cfg: ExperimentConfig
        :return: ConfigCheckResult
        """
        errors: List[str] = []
        warnings: List[str] = []

        topologies = []
        for name in cfg.systems:
            try:
                kind, value = parse_system(name)
            except ConfigError as e:
                errors.append(str(e))
                continue
            if kind == "cvector":
                topologies.append(value)
            elif cfg.pooling == "attention":
                errors.extend(self._check_heads(cfg, [value]))

        if topologies and cfg.pooling == "stats":
            warnings.append("pooling=stats применяется только к d-vector системам")

        for topology in topologies:
            errors.extend(self._check_topology(cfg, topology))

        if cfg.train.window_frames < max(cfg.hornn.recurrence_offsets):
            warnings.append("Окно короче наибольшего смещения рекуррентности HORNN")

        for warning in warnings:
            self.logger.warning(warning)

        return ConfigCheckResult(errors=errors, warnings=warnings)

    def _check_heads(self, cfg: "ExperimentConfig", encoders: List[str]) -> List[str]:
        errors = []
        lambdas = cfg.attention.penalty.lambdas
        for encoder in encoders:
            heads = cfg.combiner.heads_for(encoder, cfg.attention.heads)
            if lambdas is not None and len(lambdas) != heads:
                errors.append(
                    f"{encoder}: задано {len(lambdas)} значений λ для {heads} голов"
                )
        return errors

    def _check_topology(self, cfg: "ExperimentConfig", topology: str) -> List[str]:
        combiner = cfg.combiner
        errors = self._check_heads(cfg, combiner.encoders)
        dims = {
            "tdnn": cfg.tdnn.projection_dim,
            "hornn": cfg.hornn.projection_dim,
        }
        heads = {
            e: combiner.heads_for(e, cfg.attention.heads) for e in combiner.encoders
        }
        fc = combiner.resolved_fc_transform(topology)
        widths = {dims[e] for e in combiner.encoders}

        if topology == "simultaneous" and len(widths) > 1:
            errors.append(
                f"simultaneous требует общей размерности n, получено {widths}"
            )
        if topology in ("consec1", "consec2") and not fc and len(widths) > 1:
            errors.append(
                f"{topology} без fc_transform требует общей размерности n, "
                f"получено {widths}"
            )
        if topology == "consec1" and len(set(heads.values())) > 1:
            errors.append(f"consec1 требует равного числа голов, получено {heads}")

        if topology == "consec2":
            stage2_heads = combiner.resolved_stage2_heads(topology, cfg.attention.heads)
            stage2 = combiner.stage2_penalty
            if (
                stage2 is not None
                and stage2.lambdas is not None
                and len(stage2.lambdas) != stage2_heads
            ):
                errors.append(
                    f"Штраф второй ступени: {len(stage2.lambdas)} значений λ "
                    f"для {stage2_heads} голов"
                )
        return errors
