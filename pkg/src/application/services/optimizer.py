from typing import List, Sequence, Tuple

import numpy as np

from src.core.tensor import Tensor


class AdamOptimizer:
    """Адаптивный градиентный спуск по первому и второму моментам."""

    def __init__(
        self,
        params: Sequence[Tensor],
        lr: float = 1e-3,
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ):
        self.params: List[Tensor] = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.steps = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        """Шаг по накопленным градиентам; параметры без градиента пропускаются."""
        self.steps += 1
        correction1 = 1.0 - self.beta1**self.steps
        correction2 = 1.0 - self.beta2**self.steps
        for p, m, v in zip(self.params, self._m, self._v):
            if p.grad is None:
                continue
            m *= self.beta1
            m += (1.0 - self.beta1) * p.grad
            v *= self.beta2
            v += (1.0 - self.beta2) * p.grad * p.grad
            if self.lr == 0.0:
                continue
            update = (m / correction1) / (np.sqrt(v / correction2) + self.eps)
            p.data = p.data - self.lr * update

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()
