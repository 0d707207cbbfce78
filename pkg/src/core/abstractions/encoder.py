from abc import abstractmethod

from src.core.abstractions.module import BaseModule
from src.core.tensor import Tensor


class BaseEncoder(BaseModule):
    """Покадровый экстрактор: признаки T×f -> последовательность H (T×n)."""

    @property
    @abstractmethod
    def output_dim(self) -> int:
        """
        Размерность выхода n (вход слоя внимания).

        :return: n
        """
        pass

    @abstractmethod
    def forward(self, features: Tensor) -> Tensor:
        """
        Прямой проход по окну признаков.

        :param features: Признаки T×f
        :return: Покадровые выходы T×n
        """
        pass
