"""
Примитивные операции над Tensor с зарегистрированными градиентами.

Бродкастинг намеренно ограничен: совпадающие формы, скаляр (один элемент)
или строка (1×n либо n) против матрицы m×n.
"""

from typing import Optional, Sequence, Tuple

import numpy as np

from src.core.exceptions import DataError, DimensionError, NumericError
from src.core.tensor.tensor import Tensor


def as_tensor(x) -> Tensor:
    """Обернуть число или массив в Tensor без градиента."""
    return x if isinstance(x, Tensor) else Tensor(x)


def _is_scalar_shape(shape: Tuple[int, ...]) -> bool:
    return len(shape) <= 2 and int(np.prod(shape)) == 1


def _is_row_of(row: Tuple[int, ...], full: Tuple[int, ...]) -> bool:
    if len(full) != 2:
        return False
    return row == (1, full[1]) or row == (full[1],)


def _check_broadcast(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape == b.shape:
        return
    if _is_scalar_shape(a.shape) or _is_scalar_shape(b.shape):
        return
    if _is_row_of(a.shape, b.shape) or _is_row_of(b.shape, a.shape):
        return
    raise DimensionError(f"{op}: несовместимые формы {a.shape} и {b.shape}")


def _reduce_to(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    if int(np.prod(shape)) == 1:
        return np.full(shape, grad.sum())
    return grad.sum(axis=0).reshape(shape)


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "add")

    def backward(g):
        return _reduce_to(g, a.shape), _reduce_to(g, b.shape)

    return Tensor.from_op(a.data + b.data, (a, b), backward, "add")


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "sub")

    def backward(g):
        return _reduce_to(g, a.shape), _reduce_to(-g, b.shape)

    return Tensor.from_op(a.data - b.data, (a, b), backward, "sub")


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "mul")

    def backward(g):
        return _reduce_to(g * b.data, a.shape), _reduce_to(g * a.data, b.shape)

    return Tensor.from_op(a.data * b.data, (a, b), backward, "mul")


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "div")
    out = a.data / b.data

    def backward(g):
        return (
            _reduce_to(g / b.data, a.shape),
            _reduce_to(-g * out / b.data, b.shape),
        )

    return Tensor.from_op(out, (a, b), backward, "div")


def scale(x, factor: float) -> Tensor:
    x = as_tensor(x)
    factor = float(factor)

    def backward(g):
        return (g * factor,)

    return Tensor.from_op(x.data * factor, (x,), backward, "scale")


def matmul(a, b) -> Tensor:
    """
    Матричное произведение двух 2D тензоров.

    :raises DimensionError: если внутренние размерности не совпадают
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: несовместимые формы {a.shape} × {b.shape}")

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return Tensor.from_op(a.data @ b.data, (a, b), backward, "matmul")


def tanh(x) -> Tensor:
    x = as_tensor(x)
    y = np.tanh(x.data)

    def backward(g):
        return (g * (1.0 - y * y),)

    return Tensor.from_op(y, (x,), backward, "tanh")


def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0

    def backward(g):
        return (g * mask,)

    return Tensor.from_op(np.maximum(x.data, 0.0), (x,), backward, "relu")


def sqrt(x) -> Tensor:
    x = as_tensor(x)
    y = np.sqrt(x.data)

    def backward(g):
        return (g * 0.5 / y,)

    return Tensor.from_op(y, (x,), backward, "sqrt")


def exp(x) -> Tensor:
    x = as_tensor(x)
    y = np.exp(x.data)

    def backward(g):
        return (g * y,)

    return Tensor.from_op(y, (x,), backward, "exp")


def log(x) -> Tensor:
    """
    Натуральный логарифм.

    :raises NumericError: для неположительных элементов
    """
    x = as_tensor(x)
    if np.any(x.data <= 0):
        raise NumericError("log: неположительный аргумент")

    def backward(g):
        return (g / x.data,)

    return Tensor.from_op(np.log(x.data), (x,), backward, "log")


def neg(x) -> Tensor:
    return scale(x, -1.0)


def elementwise(op: str, x, *args) -> Tensor:
    """
    Поэлементная операция по имени: tanh, relu, add, scale.

    :param op: Имя операции
    :param x: Вход
    :param args: Второй операнд (add) или множитель (scale)
    """
    if op == "tanh":
        return tanh(x)
    if op == "relu":
        return relu(x)
    if op == "add":
        return add(x, args[0])
    if op == "scale":
        return scale(x, args[0])
    raise ValueError(f"Неизвестная поэлементная операция: {op}")


def sum(x, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    out = np.sum(x.data, axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return Tensor.from_op(out, (x,), backward, "sum")


def mean(x, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    count = x.size if axis is None else x.shape[axis]
    return scale(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def transpose(x) -> Tensor:
    x = as_tensor(x)
    if x.ndim != 2:
        raise DimensionError(f"transpose: ожидается 2D тензор, форма {x.shape}")

    def backward(g):
        return (g.T,)

    return Tensor.from_op(x.data.T, (x,), backward, "transpose")


def reshape(x, shape: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    shape = tuple(int(d) for d in shape)
    if int(np.prod(shape)) != x.size:
        raise DimensionError(f"reshape: {x.shape} нельзя привести к {shape}")

    def backward(g):
        return (g.reshape(x.shape),)

    return Tensor.from_op(x.data.reshape(shape), (x,), backward, "reshape")


def flatten(x) -> Tensor:
    """Построчно развернуть тензор в строку 1×size."""
    x = as_tensor(x)
    return reshape(x, (1, x.size))


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    """
    Склеить 2D тензоры по строкам (axis=0) или столбцам (axis=1).
    """
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise DimensionError("concat: пустой список тензоров")
    other = 1 - axis
    for t in tensors:
        if t.ndim != 2 or t.shape[other] != tensors[0].shape[other]:
            raise DimensionError(
                f"concat: несовместимые формы {tensors[0].shape} и {t.shape}"
            )
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return Tensor.from_op(
        np.concatenate([t.data for t in tensors], axis=axis),
        tensors,
        backward,
        "concat",
    )


def softmax_columns(x) -> Tensor:
    """
    Softmax по столбцам матрицы T×h со сдвигом на максимум столбца.

    :raises NumericError: при nan/inf во входе
    """
    x = as_tensor(x)
    if x.ndim != 2:
        raise DimensionError(f"softmax_columns: ожидается 2D тензор, форма {x.shape}")
    if not np.all(np.isfinite(x.data)):
        raise NumericError("softmax_columns: вход содержит nan или inf")
    shifted = np.exp(x.data - x.data.max(axis=0, keepdims=True))
    y = shifted / shifted.sum(axis=0, keepdims=True)

    def backward(g):
        return (y * (g - np.sum(g * y, axis=0, keepdims=True)),)

    return Tensor.from_op(y, (x,), backward, "softmax_columns")


def frobenius_sq(x) -> Tensor:
    """Сумма квадратов элементов (квадрат нормы Фробениуса)."""
    x = as_tensor(x)

    def backward(g):
        return (2.0 * g * x.data,)

    return Tensor.from_op(np.sum(x.data * x.data), (x,), backward, "frobenius_sq")


def cross_entropy(logits, label: int) -> Tensor:
    """
    −log softmax(logits)[label] для строки логитов.

    :raises DataError: если метка вне диапазона классов
    """
    logits = as_tensor(logits)
    row = logits.data.reshape(-1)
    if not 0 <= label < row.size:
        raise DataError(f"Метка {label} вне диапазона [0, {row.size})")
    shifted = row - row.max()
    log_norm = np.log(np.sum(np.exp(shifted)))
    probs = np.exp(shifted - log_norm)

    def backward(g):
        grad = probs.copy()
        grad[label] -= 1.0
        return ((g * grad).reshape(logits.shape),)

    return Tensor.from_op(
        log_norm - shifted[label], (logits,), backward, "cross_entropy"
    )


def cross_entropy_rows(logits, labels: Sequence[int]) -> Tensor:
    """
    Среднее −log softmax по строкам матрицы логитов T×N.

    :raises DataError: если метка вне диапазона или их число не равно T
    """
    logits = as_tensor(logits)
    labels = np.asarray(labels, dtype=int)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise DataError(
            f"cross_entropy_rows: {labels.size} меток для логитов {logits.shape}"
        )
    if np.any(labels < 0) or np.any(labels >= logits.shape[1]):
        raise DataError(f"Метки вне диапазона [0, {logits.shape[1]})")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_norm = np.log(np.sum(np.exp(shifted), axis=1))
    rows = np.arange(labels.size)
    probs = np.exp(shifted - log_norm[:, None])

    def backward(g):
        grad = probs.copy()
        grad[rows, labels] -= 1.0
        return (g * grad / labels.size,)

    value = np.mean(log_norm - shifted[rows, labels])
    return Tensor.from_op(value, (logits,), backward, "cross_entropy_rows")
