"""Central finite-difference gradient checking."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .core import Tape, Tensor, backward


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> float:
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale)) if analytic.size else 0.0


def numeric_gradient(fn: Callable[[], Tensor], param: Tensor, eps: float = 1e-5) -> np.ndarray:
    grad = np.zeros_like(param.data)
    flat = param.data.reshape(-1)
    out = grad.reshape(-1)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + eps
        up = fn().item()
        flat[k] = orig - eps
        down = fn().item()
        flat[k] = orig
        out[k] = (up - down) / (2 * eps)
    return grad


def check_gradients(fn: Callable[[], Tensor], params: Sequence[Tensor], eps: float = 1e-5) -> dict[str, float]:
    """Worst relative error per parameter between tape gradients and central differences.

    ``fn`` must be a deterministic closure over ``params`` returning a scalar.
    """
    with Tape() as tape:
        loss = fn()
    grads = backward(loss, tape, params)
    report = {}
    for i, p in enumerate(params):
        report[p.name or f"#{i}"] = relative_error(grads[p], numeric_gradient(fn, p, eps))
    return report
