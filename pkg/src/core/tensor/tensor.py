import threading
from contextlib import contextmanager
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.exceptions import GraphError

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_recording = threading.local()


def is_grad_enabled() -> bool:
    """Записываются ли операции в граф в текущем потоке."""
    return getattr(_recording, "enabled", True)


@contextmanager
def no_grad():
    """
    Контекст без записи графа вычислений (только в текущем потоке).
    """
    previous = is_grad_enabled()
    _recording.enabled = False
    try:
        yield
    finally:
        _recording.enabled = previous


class Tensor:
    """
    Плотный массив float64 с поддержкой обратного автоматического
    дифференцирования.

    Граф вычислений хранится неявно: каждый результат операции помнит своих
    родителей и функцию, переводящую градиент выхода в градиенты входов.
    Градиенты листьев накапливаются (требуется явный zero_grad()).
    """

    def __init__(self, data, requires_grad: bool = False):
        """
        :param data: Число, вложенный список, ndarray или Tensor
        :param requires_grad: Нужно ли считать градиент по тензору
        """
        if isinstance(data, Tensor):
            data = data.data
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self._parents: Tuple["Tensor", ...] = ()
        self._backward_fn: Optional[BackwardFn] = None
        self._op = "leaf"
        self._released = False

    @classmethod
    def from_op(
        cls,
        data: np.ndarray,
        parents: Sequence["Tensor"],
        backward_fn: BackwardFn,
        op: str,
    ) -> "Tensor":
        """
        Создать результат примитивной операции и записать его в граф.

        :param data: Значение результата
        :param parents: Входы операции
        :param backward_fn: grad_out -> градиенты по каждому входу (или None)
        :param op: Имя операции (для диагностики)
        :return: Новый тензор
        """
        out = cls.__new__(cls)
        out.data = np.asarray(data, dtype=np.float64)
        out.grad = None
        out._op = op
        out._released = False
        track = is_grad_enabled() and any(p.requires_grad for p in parents)
        out.requires_grad = track
        out._parents = tuple(parents) if track else ()
        out._backward_fn = backward_fn if track else None
        return out

    def __repr__(self) -> str:
        return (
            f"Tensor(shape={self.shape}, op={self._op}, "
            f"requires_grad={self.requires_grad})"
        )

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        """
        Обратный проход от скалярной функции потерь.

        Градиенты листьев накапливаются, промежуточные узлы получают свой
        градиент и освобождаются; повторный вызов на том же графе запрещён.
        """
        if self.size != 1:
            raise GraphError(f"backward требует скалярный тензор, форма {self.shape}")
        if self._released:
            raise GraphError("backward уже выполнялся для этого графа")
        if not self.requires_grad:
            raise GraphError("Тензор не записан в графе вычислений")

        order = self._topological_order()
        pending = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            grad = pending.pop(id(node), None)
            if grad is None:
                continue
            if node._backward_fn is None:
                node.grad = grad.copy() if node.grad is None else node.grad + grad
                continue
            node.grad = grad
            parent_grads = node._backward_fn(grad)
            for parent, parent_grad in zip(node._parents, parent_grads):
                if parent_grad is None or not parent.requires_grad:
                    continue
                if parent_grad.shape != parent.shape:
                    raise GraphError(
                        f"{node._op}: форма градиента {parent_grad.shape} "
                        f"не совпадает с формой входа {parent.shape}"
                    )
                key = id(parent)
                pending[key] = (
                    parent_grad if key not in pending else pending[key] + parent_grad
                )

        for node in order:
            if node._backward_fn is not None:
                node._backward_fn = None
                node._parents = ()
                node._released = True

    def _topological_order(self) -> List["Tensor"]:
        order: List[Tensor] = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            if node._released:
                raise GraphError("Граф уже освобождён предыдущим backward")
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def __add__(self, other):
        from src.core.tensor import functional as F

        return F.add(self, other)

    def __radd__(self, other):
        from src.core.tensor import functional as F

        return F.add(other, self)

    def __sub__(self, other):
        from src.core.tensor import functional as F

        return F.sub(self, other)

    def __rsub__(self, other):
        from src.core.tensor import functional as F

        return F.sub(other, self)

    def __mul__(self, other):
        from src.core.tensor import functional as F

        return F.mul(self, other)

    def __rmul__(self, other):
        from src.core.tensor import functional as F

        return F.mul(other, self)

    def __truediv__(self, other):
        from src.core.tensor import functional as F

        return F.div(self, other)

    def __neg__(self):
        from src.core.tensor import functional as F

        return F.neg(self)

    def __matmul__(self, other):
        from src.core.tensor import functional as F

        return F.matmul(self, other)

    @property
    def T(self) -> "Tensor":
        from src.core.tensor import functional as F

        return F.transpose(self)

    def reshape(self, *shape) -> "Tensor":
        from src.core.tensor import functional as F

        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return F.reshape(self, shape)

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        from src.core.tensor import functional as F

        return F.sum(self, axis=axis, keepdims=keepdims)
