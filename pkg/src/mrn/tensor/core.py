"""Dense float64 tensors with a tape for reverse-mode differentiation."""

from __future__ import annotations

import math
import threading
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from ..errors import DoubleBackward, NumericError

_local = threading.local()


class Tensor:
    """A float64 array that may participate in reverse-mode differentiation.

    Leaf tensors created with ``requires_grad=True`` are parameters. Results of
    primitives executed while a :class:`Tape` is active are *tracked* when any
    input is a parameter or itself tracked.
    """

    __slots__ = ("data", "requires_grad", "tracked", "name", "__weakref__")
    __array_priority__ = 100

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.tracked = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{tag}, requires_grad={self.requires_grad})"

    # operator sugar; the primitives live in ``ops``
    def __add__(self, other):
        from . import ops

        return ops.add(self, other)

    def __radd__(self, other):
        from . import ops

        return ops.add(other, self)

    def __sub__(self, other):
        from . import ops

        return ops.sub(self, other)

    def __rsub__(self, other):
        from . import ops

        return ops.sub(other, self)

    def __mul__(self, other):
        from . import ops

        return ops.mul(self, other)

    def __rmul__(self, other):
        from . import ops

        return ops.mul(other, self)

    def __truediv__(self, other):
        from . import ops

        return ops.div(self, other)

    def __rtruediv__(self, other):
        from . import ops

        return ops.div(other, self)

    def __neg__(self):
        from . import ops

        return ops.mul(self, -1.0)

    def __matmul__(self, other):
        from . import ops

        return ops.matmul(self, other)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class _Record:
    __slots__ = ("op", "out", "inputs", "backward")

    def __init__(self, op: str, out: Tensor, inputs: tuple[Tensor, ...], backward: BackwardFn):
        self.op = op
        self.out = out
        self.inputs = inputs
        self.backward = backward


class Tape:
    """Ordered record of primitives executed while the tape is active.

    Use as a context manager; tapes are thread-local and may nest (the
    innermost one records).
    """

    def __init__(self):
        self.records: list[_Record] = []
        self.consumed = False

    def __enter__(self) -> "Tape":
        stack = getattr(_local, "stack", None)
        if stack is None:
            stack = _local.stack = []
        stack.append(self)
        return self

    def __exit__(self, *exc) -> None:
        _local.stack.pop()

    def __len__(self) -> int:
        return len(self.records)


def active_tape() -> Optional[Tape]:
    stack = getattr(_local, "stack", None)
    return stack[-1] if stack else None


def check_finite(arr: np.ndarray, op: str) -> np.ndarray:
    # a finite sum implies finite entries; the full test runs only when it is not
    if not math.isfinite(float(np.add.reduce(arr, axis=None))) and not np.isfinite(arr).all():
        raise NumericError(f"{op} produced a non-finite value")
    return arr


def emit(op: str, data: np.ndarray, inputs: Iterable[Tensor], backward: BackwardFn, closed: bool = False) -> Tensor:
    """Wrap a primitive's output, recording it on the active tape when needed.

    ``closed`` marks primitives that cannot turn finite inputs into non-finite
    outputs; their check is skipped since every input already passed one.
    """
    if not closed:
        check_finite(data, op)
    inputs = tuple(inputs)
    out = Tensor(data)
    tape = active_tape()
    if tape is not None and any(t.tracked for t in inputs):
        out.tracked = True
        tape.records.append(_Record(op, out, inputs, backward))
    return out


def backward(loss: Tensor, tape: Tape, params: Optional[Iterable[Tensor]] = None) -> dict[Tensor, np.ndarray]:
    """Gradients of scalar ``loss`` w.r.t. ``params`` (default: every parameter on the tape).

    Parameters that did not take part in the computation get zero gradients.
    """
    if loss.size != 1:
        raise ValueError(f"loss must be a scalar, got shape {loss.shape}")
    if tape.consumed:
        raise DoubleBackward("this tape has already been differentiated")
    tape.consumed = True
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    leaves: dict[int, Tensor] = {}
    for rec in reversed(tape.records):
        g = grads.pop(id(rec.out), None)
        if g is None:
            continue
        for inp, gi in zip(rec.inputs, rec.backward(g)):
            if gi is None or not inp.tracked:
                continue
            check_finite(gi, f"d{rec.op}")
            key = id(inp)
            if key in grads:
                grads[key] = grads[key] + gi
            else:
                grads[key] = gi
            if inp.requires_grad:
                leaves[key] = inp
    if params is None:
        params = leaves.values()
    return {p: grads.get(id(p), np.zeros_like(p.data)) for p in params}
