from pathlib import Path
from typing import Any, Dict, List

from src.application.services.experiment import ExperimentService
from src.core.abstractions.workflow import BaseWorkflow
from src.core.logging import get_logger
from src.core.validation.config_validator import parse_system
from src.infra.storage.run_layout import RunLayout


class PipelineWorkflow(BaseWorkflow):
    """
    Полный прогон из одной конфигурации: корпус -> обучение всех систем ->
    извлечение dev/eval -> настройка порога на dev -> eval с замороженным
    порогом -> SER -> сводная таблица.
    """

    def __init__(self, service: ExperimentService):
        self.service = service
        self.logger = get_logger(__name__)
        self.steps = [
            self._synth_node,
            self._train_node,
            self._extract_node,
            self._cluster_node,
            self._score_node,
            self._report_node,
        ]

    def execute(self, initial_state: Dict[str, Any]) -> Dict[str, Any]:
        """
        :param initial_state: run_dir, force, jobs (необязательно)
        :return: Состояние с путями артефактов, SER и таблицей
        """
        state = dict(initial_state)
        state["layout"] = RunLayout(Path(state["run_dir"]))
        state.setdefault("ser", {})
        for step in self.steps:
            name = step.__name__.strip("_").replace("_node", "")
            self.logger.info(f"Шаг конвейера: {name}")
            state = step(state)
        return state

    def _systems(self) -> List[str]:
        systems = self.service.cfg.systems
        return sorted(systems, key=lambda s: parse_system(s)[0] != "dvector")

    def _synth_node(self, state: Dict[str, Any]) -> Dict[str, Any]:
        layout: RunLayout = state["layout"]
        self.service.synth(layout.corpus, force=state.get("force", False))
        return state

    def _train_node(self, state: Dict[str, Any]) -> Dict[str, Any]:
        layout: RunLayout = state["layout"]
        trained: Dict[str, Path] = {}
        for system in self._systems():
            kind, value = parse_system(system)
            init = {}
            if kind == "cvector":
                init = {
                    name: trained[name]
                    for name in self.service.cfg.combiner.encoders
                    if name in trained
                }
            self.service.train(layout.corpus, system, layout.system(system).root, init)
            if kind == "dvector":
                trained[value] = layout.system(system).checkpoint
        return state

    def _extract_node(self, state: Dict[str, Any]) -> Dict[str, Any]:
        layout: RunLayout = state["layout"]
        for system in self._systems():
            target = layout.system(system)
            for split in ("dev", "eval"):
                self.service.extract(
                    target.checkpoint,
                    layout.corpus,
                    split,
                    target.embeddings(split),
                    state.get("jobs"),
                )
        return state

    def _cluster_node(self, state: Dict[str, Any]) -> Dict[str, Any]:
        layout: RunLayout = state["layout"]
        for system in self._systems():
            target = layout.system(system)
            self.service.cluster(
                target.embeddings("dev"),
                target.hypothesis("dev"),
                reference=self.service.reference_for(layout.corpus, "dev"),
                tune=True,
                tuning_out=target.tuning,
            )
            self.service.cluster(
                target.embeddings("eval"),
                target.hypothesis("eval"),
                threshold_from=target.tuning,
            )
        return state

    def _score_node(self, state: Dict[str, Any]) -> Dict[str, Any]:
        layout: RunLayout = state["layout"]
        for system in self._systems():
            target = layout.system(system)
            for split in ("dev", "eval"):
                report = self.service.score(
                    self.service.reference_for(layout.corpus, split),
                    target.hypothesis(split),
                    out_json=target.ser_report(split),
                )
                state["ser"][(system, split)] = report.ser_percent
        return state

    def _report_node(self, state: Dict[str, Any]) -> Dict[str, Any]:
        state["report"] = self.service.report(state["layout"].root)
        return state
