"""Compare the compiled and numpy implementations of the fused graph kernels.

    python3 benchmarks/bench_kernels.py [--sizes 16 32 64 128] [--repeat 20]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from mrn.tensor import _pykernels

try:
    from mrn.tensor import _ckernels
except ImportError:
    _ckernels = None


def _inputs(n: int, d: int, p: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(n, d))
    attn = rng.normal(size=2 * d)
    edges = rng.normal(size=(n, n, p)) * (rng.random((n, n, p)) < 0.2)
    return h, attn, edges


def _bench(impl, h, attn, edges, repeat: int) -> dict[str, float]:
    fwd = impl.edge_attention_forward(h, attn, edges, 0.2, 1e-9)
    fhat, e, s, denom = fwd
    g = np.ones_like(fhat)
    agg = impl.channel_aggregate_forward(fhat, h)
    ga = np.ones_like(agg)
    cases = {
        "attention fwd": lambda: impl.edge_attention_forward(h, attn, edges, 0.2, 1e-9),
        "attention bwd": lambda: impl.edge_attention_backward(g, h, attn, edges, e, s, denom, fhat, 0.2),
        "aggregate fwd": lambda: impl.channel_aggregate_forward(fhat, h),
        "aggregate bwd": lambda: impl.channel_aggregate_backward(ga, fhat, h),
    }
    return {k: min(timeit.repeat(f, number=1, repeat=repeat)) * 1e6 for k, f in cases.items()}


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64, 128])
    ap.add_argument("--d", type=int, default=8)
    ap.add_argument("--p", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; only the numpy path is timed")
    print(f"{'N':>5} {'kernel':<15} {'numpy us':>10} {'cython us':>10} {'speedup':>8}")
    for n in args.sizes:
        h, attn, edges = _inputs(n, args.d, args.p)
        py = _bench(_pykernels, h, attn, edges, args.repeat)
        cy = _bench(_ckernels, h, attn, edges, args.repeat) if _ckernels else {}
        for name, t in py.items():
            c = cy.get(name)
            tail = f"{c:10.1f} {t / c:7.2f}x" if c else f"{'-':>10} {'-':>8}"
            print(f"{n:5d} {name:<15} {t:10.1f} {tail}")


if __name__ == "__main__":
    main()
