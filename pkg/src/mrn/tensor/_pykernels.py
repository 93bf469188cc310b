"""Reference numpy implementation of the fused graph kernels."""

from __future__ import annotations

import numpy as np


def edge_attention_forward(h, attn, edges, slope, eps):
    d = h.shape[1]
    e = (h @ attn[:d])[:, None] + (h @ attn[d:])[None, :]
    with np.errstate(over="ignore"):
        s = np.exp(np.where(e > 0, e, slope * e))
    f = s[:, :, None] * edges
    denom = np.abs(f).sum(axis=1, keepdims=True) + eps
    return f / denom, e, s, denom


def edge_attention_backward(g, h, attn, edges, e, s, denom, fhat, slope):
    d = h.shape[1]
    df = (g - np.sign(edges) * (g * fhat).sum(axis=1, keepdims=True)) / denom
    d_edges = df * s[:, :, None]
    de = (df * edges).sum(axis=2) * s * np.where(e > 0, 1.0, slope)
    rows, cols = de.sum(axis=1), de.sum(axis=0)
    d_h = np.outer(rows, attn[:d]) + np.outer(cols, attn[d:])
    d_attn = np.concatenate([h.T @ rows, h.T @ cols])
    return d_h, d_attn, d_edges


def channel_aggregate_forward(coef, h):
    n, _, p = coef.shape
    # (P, N, N) @ (N, d) -> (P, N, d) -> (N, P*d)
    out = np.transpose(coef, (2, 0, 1)) @ h
    return np.ascontiguousarray(np.transpose(out, (1, 0, 2)).reshape(n, p * h.shape[1]))


def channel_aggregate_backward(g, coef, h):
    n, _, p = coef.shape
    d = h.shape[1]
    gr = g.reshape(n, p, d)
    d_coef = np.einsum("ipk,jk->ijp", gr, h)
    d_h = np.einsum("ijp,ipk->jk", coef, gr)
    return d_coef, d_h
