from dataclasses import dataclass, field
from typing import List

from src.core.exceptions import ConfigError


@dataclass
class ConfigCheckResult:
    """Итог перекрёстной проверки конфигурации эксперимента."""

    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.errors

    def raise_for_errors(self) -> None:
        """
        :raises ConfigError: со всеми найденными нарушениями через "; "
        """
        if self.errors:
            raise ConfigError("; ".join(self.errors))
