from abc import ABC, abstractmethod
from typing import Any, Dict


class BaseWorkflow(ABC):
    """Базовый Workflow для многошаговых сценариев CLI."""

    @abstractmethod
    def execute(self, initial_state: Dict[str, Any]) -> Dict[str, Any]:
        """
        Вызвать Workflow

        :param initial_state: Начальное состояние
        :return: Результат выполнения Workflow
        """
        pass
