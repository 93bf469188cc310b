# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled fused graph kernels; same contract as ``_pykernels``."""

import numpy as np
from libc.math cimport exp, fabs


def edge_attention_forward(double[:, ::1] h, double[::1] attn, double[:, :, ::1] edges, double slope, double eps):
    cdef Py_ssize_t n = h.shape[0], d = h.shape[1], p = edges.shape[2]
    cdef Py_ssize_t i, j, k, q
    cdef double acc
    rows_np = np.zeros(n)
    cols_np = np.zeros(n)
    e_np = np.empty((n, n))
    s_np = np.empty((n, n))
    denom_np = np.empty((n, 1, p))
    fhat_np = np.empty((n, n, p))
    cdef double[::1] rows = rows_np, cols = cols_np
    cdef double[:, ::1] e = e_np, s = s_np
    cdef double[:, :, ::1] denom = denom_np, fhat = fhat_np
    for i in range(n):
        acc = 0.0
        for k in range(d):
            acc = acc + h[i, k] * attn[k]
        rows[i] = acc
        acc = 0.0
        for k in range(d):
            acc = acc + h[i, k] * attn[d + k]
        cols[i] = acc
    for i in range(n):
        for q in range(p):
            denom[i, 0, q] = eps
        for j in range(n):
            acc = rows[i] + cols[j]
            e[i, j] = acc
            s[i, j] = exp(acc if acc > 0 else slope * acc)
            for q in range(p):
                fhat[i, j, q] = s[i, j] * edges[i, j, q]
                denom[i, 0, q] += fabs(fhat[i, j, q])
        for j in range(n):
            for q in range(p):
                fhat[i, j, q] = fhat[i, j, q] / denom[i, 0, q]
    return fhat_np, e_np, s_np, denom_np


def edge_attention_backward(double[:, :, ::1] g, double[:, ::1] h, double[::1] attn, double[:, :, ::1] edges,
                            double[:, ::1] e, double[:, ::1] s, double[:, :, ::1] denom, double[:, :, ::1] fhat,
                            double slope):
    cdef Py_ssize_t n = h.shape[0], d = h.shape[1], p = edges.shape[2]
    cdef Py_ssize_t i, j, k, q
    cdef double df, de
    d_edges_np = np.empty((n, n, p))
    d_h_np = np.zeros((n, d))
    d_attn_np = np.zeros(2 * d)
    dot_np = np.zeros(p)
    rows_np = np.zeros(n)
    cols_np = np.zeros(n)
    cdef double[:, :, ::1] d_edges = d_edges_np
    cdef double[:, ::1] d_h = d_h_np
    cdef double[::1] d_attn = d_attn_np, dot = dot_np, rows = rows_np, cols = cols_np
    for i in range(n):
        for q in range(p):
            dot[q] = 0.0
        for j in range(n):
            for q in range(p):
                dot[q] += g[i, j, q] * fhat[i, j, q]
        for j in range(n):
            de = 0.0
            for q in range(p):
                df = g[i, j, q]
                if edges[i, j, q] > 0:
                    df = df - dot[q]
                elif edges[i, j, q] < 0:
                    df = df + dot[q]
                df = df / denom[i, 0, q]
                d_edges[i, j, q] = df * s[i, j]
                de = de + df * edges[i, j, q]
            de = de * s[i, j] * (1.0 if e[i, j] > 0 else slope)
            rows[i] += de
            cols[j] += de
    for i in range(n):
        for k in range(d):
            d_h[i, k] = rows[i] * attn[k] + cols[i] * attn[d + k]
            d_attn[k] += h[i, k] * rows[i]
            d_attn[d + k] += h[i, k] * cols[i]
    return d_h_np, d_attn_np, d_edges_np


def channel_aggregate_forward(double[:, :, ::1] coef, double[:, ::1] h):
    cdef Py_ssize_t n = h.shape[0], d = h.shape[1], p = coef.shape[2]
    cdef Py_ssize_t i, j, k, q
    cdef double c
    out_np = np.zeros((n, p * d))
    cdef double[:, ::1] out = out_np
    for i in range(n):
        for j in range(n):
            for q in range(p):
                c = coef[i, j, q]
                if c == 0.0:
                    continue
                for k in range(d):
                    out[i, q * d + k] += c * h[j, k]
    return out_np


def channel_aggregate_backward(double[:, ::1] g, double[:, :, ::1] coef, double[:, ::1] h):
    cdef Py_ssize_t n = h.shape[0], d = h.shape[1], p = coef.shape[2]
    cdef Py_ssize_t i, j, k, q
    cdef double acc, c
    d_coef_np = np.empty((n, n, p))
    d_h_np = np.zeros((n, d))
    cdef double[:, :, ::1] d_coef = d_coef_np
    cdef double[:, ::1] d_h = d_h_np
    for i in range(n):
        for j in range(n):
            for q in range(p):
                acc = 0.0
                c = coef[i, j, q]
                for k in range(d):
                    acc = acc + g[i, q * d + k] * h[j, k]
                    d_h[j, k] += c * g[i, q * d + k]
                d_coef[i, j, q] = acc
    return d_coef_np, d_h_np
