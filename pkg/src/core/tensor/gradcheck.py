from typing import Callable, Sequence, Union

import numpy as np

from src.core.config import config
from src.core.tensor.tensor import Tensor, no_grad

Params = Union[Tensor, Sequence[Tensor]]


def grad_check(
    f: Callable[[Params], Tensor], x: Params, step: float = config.GRAD_STEP
) -> float:
    """
    Сравнить аналитический градиент с центральными разностями.

    :param f: Функция x -> скалярный Tensor; должна строить граф заново
        при каждом вызове
    :param x: Тензор или список тензоров, по которым проверяется градиент
    :param step: Шаг центральной разности
    :return: max |analytic − numeric| / max(|analytic|, |numeric|, 1e-8)
    """
    if step <= 0:
        raise ValueError(f"Шаг должен быть положительным: {step}")
    params = [x] if isinstance(x, Tensor) else list(x)
    for p in params:
        p.zero_grad()

    out = f(x)
    if out.requires_grad:
        out.backward()
    analytic = [
        np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params
    ]

    worst = 0.0
    with no_grad():
        for p, grad in zip(params, analytic):
            flat = p.data.reshape(-1)
            grad_flat = grad.reshape(-1)
            for i in range(flat.size):
                original = flat[i]
                flat[i] = original + step
                plus = f(x).item()
                flat[i] = original - step
                minus = f(x).item()
                flat[i] = original
                numeric = (plus - minus) / (2.0 * step)
                denom = max(abs(grad_flat[i]), abs(numeric), 1e-8)
                worst = max(worst, abs(grad_flat[i] - numeric) / denom)

    for p in params:
        p.zero_grad()
    return worst
