"""Backend selection for the fused graph kernels.

The compiled extension is used when it imports; ``MRN_PURE_PYTHON=1`` forces
the numpy fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

BACKEND = "python"
_impl: ModuleType = _pykernels

if os.environ.get("MRN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        _impl = _ckernels
        BACKEND = "cython"


def impl() -> ModuleType:
    return _impl


def use(backend: str) -> None:
    """Switch backend at runtime ("python" or "cython"); used by tests and the benchmark."""
    global _impl, BACKEND
    if backend == "python":
        _impl, BACKEND = _pykernels, "python"
    elif backend == "cython":
        from . import _ckernels  # type: ignore[attr-defined]

        _impl, BACKEND = _ckernels, "cython"
    else:
        raise ValueError(f"unknown backend {backend!r}")
