"""Dense float64 tensors, reverse-mode differentiation and SGD."""

from . import kernels, ops
from .core import Tape, Tensor, active_tape, as_tensor, backward
from .gradcheck import check_gradients, numeric_gradient, relative_error
from .kernels import BACKEND
from .optim import OptimizerState, sgd_step

__all__ = [
    "BACKEND",
    "OptimizerState",
    "Tape",
    "Tensor",
    "active_tape",
    "as_tensor",
    "backward",
    "check_gradients",
    "kernels",
    "numeric_gradient",
    "ops",
    "relative_error",
    "sgd_step",
]
