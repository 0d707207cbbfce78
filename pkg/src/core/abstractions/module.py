from abc import ABC
from typing import Dict, List, Mapping

import numpy as np

from src.core.exceptions import ConfigError
from src.core.tensor import Tensor


class BaseModule(ABC):
    """Базовый контейнер обучаемых параметров и вложенных модулей."""

    def __init__(self):
        self._parameters: Dict[str, Tensor] = {}
        self._modules: Dict[str, "BaseModule"] = {}

    def register_parameter(self, name: str, value: np.ndarray) -> Tensor:
        """
        Зарегистрировать обучаемый параметр.

        :param name: Имя параметра внутри модуля
        :param value: Начальное значение
        :return: Созданный тензор
        """
        tensor = Tensor(value, requires_grad=True)
        self._parameters[name] = tensor
        return tensor

    def register_module(self, name: str, module: "BaseModule") -> "BaseModule":
        """
        Зарегистрировать вложенный модуль.

        :param name: Имя модуля (префикс его параметров)
        :param module: Модуль
        :return: Тот же модуль
        """
        self._modules[name] = module
        return module

    def named_parameters(self, prefix: str = "") -> Dict[str, Tensor]:
        """
        Параметры модуля и всех вложенных модулей в порядке регистрации.

        :param prefix: Префикс имён
        :return: Словарь имя -> тензор
        """
        named = {f"{prefix}{name}": p for name, p in self._parameters.items()}
        for name, module in self._modules.items():
            named.update(module.named_parameters(prefix=f"{prefix}{name}."))
        return named

    def parameters(self) -> List[Tensor]:
        return list(self.named_parameters().values())

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def param_count(self) -> int:
        """Число обучаемых скаляров."""
        return sum(p.size for p in self.parameters())

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.numpy() for name, p in self.named_parameters().items()}

    def load_state_dict(
        self, state: Mapping[str, np.ndarray], strict: bool = True
    ) -> None:
        """
        Загрузить значения параметров.

        :param state: Словарь имя -> массив
        :param strict: Требовать полного совпадения набора имён
        :raises ConfigError: при несовпадении имён или форм
        """
        named = self.named_parameters()
        if strict and set(named) != set(state):
            missing = sorted(set(named) - set(state))
            unexpected = sorted(set(state) - set(named))
            raise ConfigError(
                f"Параметры чекпоинта не совпадают с моделью: "
                f"нет {missing}, лишние {unexpected}"
            )
        for name, value in state.items():
            if name not in named:
                continue
            value = np.asarray(value, dtype=np.float64)
            if value.shape != named[name].shape:
                raise ConfigError(
                    f"Параметр {name}: форма {value.shape}, "
                    f"ожидалась {named[name].shape}"
                )
            named[name].data = value.copy()
