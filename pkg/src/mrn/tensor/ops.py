"""The closed set of differentiable primitives.

Every primitive either returns finite values or raises ``NumericError``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import ShapeMismatch
from . import kernels
from .core import Tensor, as_tensor, emit


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeMismatch(f"{op}: cannot broadcast {a.shape} with {b.shape}") from None


# -- linear algebra --------------------------------------------------------


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeMismatch(f"matmul: {a.shape} @ {b.shape}")
    try:
        out = np.matmul(a.data, b.data)
    except ValueError:
        raise ShapeMismatch(f"matmul: {a.shape} @ {b.shape}") from None

    def back(g):
        ga = _unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape) if a.tracked else None
        gb = _unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape) if b.tracked else None
        return ga, gb

    return emit("matmul", out, (a, b), back)


# -- elementwise -----------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)
    return emit("add", a.data + b.data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a, b)
    return emit("sub", a.data - b.data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a, b)

    def back(g):
        ga = _unbroadcast(g * b.data, a.shape) if a.tracked else None
        gb = _unbroadcast(g * a.data, b.shape) if b.tracked else None
        return ga, gb

    return emit("mul", a.data * b.data, (a, b), back)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("div", a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a.data / b.data

    def back(g):
        ga = _unbroadcast(g / b.data, a.shape) if a.tracked else None
        gb = _unbroadcast(-g * out / b.data, b.shape) if b.tracked else None
        return ga, gb

    return emit("div", out, (a, b), back)


def exp(x) -> Tensor:
    x = as_tensor(x)
    with np.errstate(over="ignore"):
        out = np.exp(x.data)
    return emit("exp", out, (x,), lambda g: (g * out,))


def log(x) -> Tensor:
    x = as_tensor(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(x.data)
    return emit("log", out, (x,), lambda g: (g / x.data,))


def clip(x, lo: float, hi: float) -> Tensor:
    """Clamp to [lo, hi]; the gradient is zero where clamping was active."""
    x = as_tensor(x)
    inside = (x.data >= lo) & (x.data <= hi)
    return emit("clip", np.clip(x.data, lo, hi), (x,), lambda g: (g * inside,), closed=True)


def leaky_relu(x, slope: float = 0.2) -> Tensor:
    x = as_tensor(x)
    factor = np.where(x.data > 0, 1.0, slope)
    return emit("leaky_relu", x.data * factor, (x,), lambda g: (g * factor,), closed=True)


def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0
    return emit("relu", np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,), closed=True)


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    z = np.exp(-np.abs(x.data))
    out = np.where(x.data >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
    return emit("sigmoid", out, (x,), lambda g: (g * out * (1.0 - out),), closed=True)


def softmax(x, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    if not -x.ndim <= axis < x.ndim:
        raise ShapeMismatch(f"softmax: axis {axis} out of range for shape {x.shape}")
    z = np.exp(x.data - x.data.max(axis=axis, keepdims=True))
    out = z / z.sum(axis=axis, keepdims=True)

    def back(g):
        return (out * (g - (g * out).sum(axis=axis, keepdims=True)),)

    return emit("softmax", out, (x,), back, closed=True)


# -- structural ------------------------------------------------------------


def concat(xs: Sequence, axis: int = 0) -> Tensor:
    xs = [as_tensor(x) for x in xs]
    try:
        out = np.concatenate([x.data for x in xs], axis=axis)
    except ValueError as exc:
        raise ShapeMismatch(f"concat: {exc}") from None
    bounds = np.cumsum([x.shape[axis] for x in xs])[:-1]

    def back(g):
        return tuple(np.split(g, bounds, axis=axis))

    return emit("concat", out, xs, back, closed=True)


def slice_(x, index) -> Tensor:
    """Basic (view) indexing: ints, slices and Ellipsis."""
    x = as_tensor(x)
    out = x.data[index]

    def back(g):
        full = np.zeros_like(x.data)
        full[index] = g
        return (full,)

    return emit("slice", np.array(out), (x,), back, closed=True)


def reshape(x, shape) -> Tensor:
    x = as_tensor(x)
    try:
        out = x.data.reshape(shape)
    except ValueError:
        raise ShapeMismatch(f"reshape: {x.shape} -> {shape}") from None
    return emit("reshape", out, (x,), lambda g: (g.reshape(x.shape),), closed=True)


def transpose(x, axes=None) -> Tensor:
    x = as_tensor(x)
    axes = tuple(reversed(range(x.ndim))) if axes is None else tuple(axes)
    inverse = tuple(np.argsort(axes))
    return emit("transpose", np.transpose(x.data, axes), (x,), lambda g: (np.transpose(g, inverse),), closed=True)


def _expand(g: np.ndarray, shape, axis, keepdims: bool) -> np.ndarray:
    if axis is None:
        return np.broadcast_to(np.reshape(g, (1,) * len(shape)), shape)
    if not keepdims:
        g = np.expand_dims(g, axis)
    return np.broadcast_to(g, shape)


def sum_(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    out = x.data.sum(axis=axis, keepdims=keepdims)
    return emit("sum", np.asarray(out), (x,), lambda g: (_expand(g, x.shape, axis, keepdims).copy(),))


def mean(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    out = x.data.mean(axis=axis, keepdims=keepdims)
    count = x.data.size / max(np.asarray(out).size, 1)
    return emit("mean", np.asarray(out), (x,), lambda g: (_expand(g, x.shape, axis, keepdims) / count,))


def max_(x, axis=None, keepdims: bool = False) -> Tensor:
    """Reduce-max; the gradient is split evenly between tied maxima."""
    x = as_tensor(x)
    out = x.data.max(axis=axis, keepdims=keepdims)

    def back(g):
        peak = _expand(np.asarray(out), x.shape, axis, keepdims)
        hit = (x.data == peak).astype(np.float64)
        hit /= _expand(hit.sum(axis=axis, keepdims=keepdims), x.shape, axis, keepdims)
        return (hit * _expand(g, x.shape, axis, keepdims),)

    return emit("max", np.asarray(out), (x,), back, closed=True)


def embedding_gather(table, ids) -> Tensor:
    """Rows of ``table`` selected by integer ``ids`` (any shape)."""
    table = as_tensor(table)
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise ShapeMismatch(f"embedding_gather: ids outside [0, {table.shape[0]})")

    def back(g):
        full = np.zeros_like(table.data)
        np.add.at(full, ids.reshape(-1), g.reshape((-1,) + table.shape[1:]))
        return (full,)

    return emit("embedding_gather", table.data[ids], (table,), back, closed=True)


def dropout(x, rate: float, train: bool, seed) -> Tensor:
    """Inverted dropout: kept activations are scaled by 1/(1-rate); identity in eval mode.

    ``seed`` is anything ``numpy.random.default_rng`` accepts, including a Generator.
    """
    x = as_tensor(x)
    if not train or rate <= 0.0:
        return x
    keep = np.random.default_rng(seed).random(x.shape) >= rate
    scale = keep / (1.0 - rate)
    return emit("dropout", x.data * scale, (x,), lambda g: (g * scale,), closed=True)


# -- fused graph kernels -----------------------------------------------------


def edge_attention(h, attn, edges, slope: float = 0.2, eps: float = 1e-9) -> Tensor:
    """Channel-wise normalized edge-gated attention coefficients.

    ``s_ij = exp(leaky_relu(h_i . attn[:d] + h_j . attn[d:]))``,
    ``f_ijp = s_ij * edges_ijp`` and the result is ``f_ijp / (sum_j |f_ijp| + eps)``.
    For non-negative edges this is plain row normalization; the absolute value
    keeps the denominator away from zero when edge features change sign.
    """
    h, attn, edges = as_tensor(h), as_tensor(attn), as_tensor(edges)
    n, d = h.shape
    if attn.shape != (2 * d,) or edges.shape[:2] != (n, n) or edges.ndim != 3:
        raise ShapeMismatch(f"edge_attention: h {h.shape}, attn {attn.shape}, edges {edges.shape}")
    impl = kernels.impl()
    hd, ad, ed = (np.ascontiguousarray(t.data) for t in (h, attn, edges))
    fhat, e, s, denom = impl.edge_attention_forward(hd, ad, ed, slope, eps)

    def back(g):
        return impl.edge_attention_backward(np.ascontiguousarray(g), hd, ad, ed, e, s, denom, fhat, slope)

    return emit("edge_attention", fhat, (h, attn, edges), back)


def channel_aggregate(coef, h) -> Tensor:
    """``out[i, p*d + k] = sum_j coef[i, j, p] * h[j, k]`` (per-channel propagation, concatenated)."""
    coef, h = as_tensor(coef), as_tensor(h)
    n = h.shape[0]
    if coef.ndim != 3 or coef.shape[:2] != (n, n):
        raise ShapeMismatch(f"channel_aggregate: coef {coef.shape}, h {h.shape}")
    impl = kernels.impl()
    cd, hd = np.ascontiguousarray(coef.data), np.ascontiguousarray(h.data)
    out = impl.channel_aggregate_forward(cd, hd)

    def back(g):
        return impl.channel_aggregate_backward(np.ascontiguousarray(g), cd, hd)

    return emit("channel_aggregate", out, (coef, h), back)
