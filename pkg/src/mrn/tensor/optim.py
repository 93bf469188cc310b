"""SGD with classical momentum."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..errors import ShapeMismatch
from .core import Tensor


@dataclass
class OptimizerState:
    lr: float = 0.002
    momentum: float = 0.0005
    velocity: dict[str, np.ndarray] = field(default_factory=dict)


def _key(p: Tensor, i: int) -> str:
    return p.name if p.name is not None else f"#{i}"


def sgd_step(params: Sequence[Tensor], grads: Mapping[Tensor, np.ndarray], state: OptimizerState) -> None:
    """In place: ``v <- momentum*v + g``; ``theta <- theta - lr*v``."""
    for i, p in enumerate(params):
        g = np.asarray(grads[p], dtype=np.float64)
        if g.shape != p.shape:
            raise ShapeMismatch(f"gradient shape {g.shape} does not match parameter {_key(p, i)} {p.shape}")
        key = _key(p, i)
        v = state.velocity.get(key)
        if v is None:
            v = np.zeros_like(p.data)
        elif v.shape != p.shape:
            raise ShapeMismatch(f"velocity shape {v.shape} does not match parameter {key} {p.shape}")
        v = state.momentum * v + g
        state.velocity[key] = v
        p.data = p.data - state.lr * v
