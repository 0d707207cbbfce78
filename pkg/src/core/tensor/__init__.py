from src.core.tensor.gradcheck import grad_check
from src.core.tensor.tensor import Tensor, is_grad_enabled, no_grad

__all__ = ["Tensor", "grad_check", "is_grad_enabled", "no_grad"]
