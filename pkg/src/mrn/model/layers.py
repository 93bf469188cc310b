"""Building blocks of the network, written over the tensor primitives.

Parameters are passed in explicitly so each block can be tested in isolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import LengthMismatch, ShapeMismatch
from ..graph.types import CONTROL, Mrfg, Mrng
from ..graph.vocab import Vocabulary
from ..tensor import Tensor, ops

PROB_FLOOR = 1e-12


def positional_encoding(i: int, d: int) -> np.ndarray:
    """Sinusoidal position vector: sin on even dims, cos on odd dims."""
    if i < 0 or d < 1:
        raise ValueError("positional_encoding needs i >= 0 and d >= 1")
    dims = np.arange(d)
    angle = i / np.power(10000.0, (dims - dims % 2) / d)
    return np.where(dims % 2 == 0, np.sin(angle), np.cos(angle))


@dataclass(frozen=True)
class GraphInputs:
    """Constant (parameter-free) arrays derived from one function graph.

    Only node pairs carrying at least one edge get a row in ``cell_counts``;
    ``cell_index`` maps each of the N*N pairs to that row plus one, or to 0.
    """

    node_ids: np.ndarray  # (N,)
    cell_index: np.ndarray  # (N*N,)
    cell_counts: np.ndarray  # (U, |edge vocab|)
    cell_positional: np.ndarray  # (U, P)

    @property
    def n(self) -> int:
        return len(self.node_ids)


def prepare_graph(g: Mrfg, vocab: Vocabulary, p: int) -> GraphInputs:
    n = len(g.nodes)
    node_ids = np.array([vocab.node_id(label) for _, label in g.nodes], dtype=np.int64)
    cells = sorted({e.src * n + e.dst for e in g.edges})
    row = {c: i for i, c in enumerate(cells)}
    counts = np.zeros((len(cells), vocab.n_edges))
    positional = np.zeros((len(cells), p))
    for e in g.edges:
        r = row[e.src * n + e.dst]
        counts[r, vocab.edge_id(e.key)] += 1.0
        if e.category == CONTROL and e.subtype == "sequential":
            positional[r] += positional_encoding(e.seq or 0, p)
    index = np.zeros(n * n, dtype=np.int64)
    index[cells] = np.arange(1, len(cells) + 1)
    return GraphInputs(node_ids, index, counts, positional)


def merge_graphs(parts: Sequence[GraphInputs]) -> tuple[GraphInputs, list[int]]:
    """Block-diagonal union of several graphs; returns it with each part's first node index."""
    total = sum(g.n for g in parts)
    index = np.zeros((total, total), dtype=np.int64)
    offsets, at, rows = [], 0, 0
    for g in parts:
        n = g.n
        local = g.cell_index.reshape(n, n)
        index[at : at + n, at : at + n] = np.where(local > 0, local + rows, 0)
        offsets.append(at)
        at += n
        rows += len(g.cell_counts)
    merged = GraphInputs(
        np.concatenate([g.node_ids for g in parts]),
        index.reshape(-1),
        np.concatenate([g.cell_counts for g in parts]),
        np.concatenate([g.cell_positional for g in parts]),
    )
    return merged, offsets


def embed_graph(inputs: GraphInputs, node_table: Tensor, edge_table: Tensor) -> tuple[Tensor, Tensor]:
    """(X0: N x F, E0: N x N x P); pairs without edges get zero rows."""
    n, p = inputs.n, edge_table.shape[1]
    x0 = ops.embedding_gather(node_table, inputs.node_ids)
    cells = ops.add(ops.matmul(Tensor(inputs.cell_counts), edge_table), Tensor(inputs.cell_positional))
    padded = ops.concat([Tensor(np.zeros((1, p))), cells], axis=0)
    return x0, ops.reshape(ops.embedding_gather(padded, inputs.cell_index), (n, n, p))


def eegcn_layer(
    x: Tensor,
    e: Tensor,
    weight: Tensor,
    attn: Tensor,
    slope: float = 0.2,
    eps: float = 1e-9,
    dropout: float = 0.0,
    train: bool = False,
    seed=None,
) -> tuple[Tensor, Tensor]:
    n, f = x.shape
    if e.ndim != 3 or e.shape[:2] != (n, n):
        raise ShapeMismatch(f"eegcn_layer: X {x.shape} with E {e.shape}")
    if weight.shape[0] != f or weight.shape[1] * e.shape[2] != f:
        raise ShapeMismatch(f"eegcn_layer: W {weight.shape} does not map {f} to {f}/{e.shape[2]}")
    h = ops.matmul(x, weight)
    coef = ops.edge_attention(h, attn, e, slope, eps)
    out = ops.relu(ops.channel_aggregate(coef, h))
    return ops.dropout(out, dropout, train, seed), coef


def fuse_layers(
    xs: Sequence[Tensor],
    query: Tensor,
    key: Tensor,
    value: Tensor,
    output: Tensor,
    heads: int,
    return_weights: bool = False,
):
    """Per-node multi-head self-attention over the sequence of layer outputs, then a mean."""
    if not xs:
        raise ShapeMismatch("fuse_layers needs at least one layer output")
    n, f = xs[0].shape
    steps = len(xs)
    dk = f // heads
    # rows ordered (node, layer)
    seq = ops.reshape(ops.concat([ops.reshape(x, (n, 1, f)) for x in xs], axis=1), (n * steps, f))

    def split(t: Tensor) -> Tensor:
        return ops.transpose(ops.reshape(ops.matmul(seq, t), (n, steps, heads, dk)), (0, 2, 1, 3))

    q, k, v = split(query), split(key), split(value)
    scores = ops.mul(ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))), 1.0 / math.sqrt(dk))
    weights = ops.softmax(scores, axis=-1)  # (N, H, L, L)
    attended = ops.reshape(ops.transpose(ops.matmul(weights, v), (0, 2, 1, 3)), (n * steps, f))
    fused = ops.mean(ops.reshape(ops.matmul(attended, output), (n, steps, f)), axis=1)
    return (fused, weights) if return_weights else fused


def sort_order(x: np.ndarray) -> np.ndarray:
    """Descending by last channel, ties by earlier channels right-to-left, then node id."""
    keys = [np.arange(x.shape[0])] + [-x[:, c] for c in range(x.shape[1])]
    return np.lexsort(keys)


def sort_pool(x: Tensor, k_prime: int) -> Tensor:
    n, f = x.shape
    order = sort_order(x.data)[:k_prime]
    kept = ops.embedding_gather(x, order)
    if n >= k_prime:
        return kept
    return ops.concat([kept, Tensor(np.zeros((k_prime - n, f)))], axis=0)


def readout(pooled: Sequence[Tensor], weight: Tensor, bias: Tensor) -> Tensor:
    """Flatten each pooled K' x F block, then one affine map plus relu: (count, c0)."""
    flat = ops.concat([ops.reshape(x, (1, x.size)) for x in pooled], axis=0)
    return ops.relu(ops.add(ops.matmul(flat, weight), bias))


@dataclass(frozen=True)
class FeaturedContractGraph:
    z0: Tensor  # (N_F, c0)
    adjacency: np.ndarray  # symmetrized calls plus identity
    degree: np.ndarray  # diagonal matrix of row sums

    @property
    def propagation(self) -> np.ndarray:
        return self.adjacency / np.diag(self.degree)[:, None]


def fcg_adjacency(n: int, calls: Sequence[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray]:
    adj = np.eye(n)
    for a, b in calls:
        if a != b:
            adj[a, b] = adj[b, a] = 1.0
    return adj, np.diag(adj.sum(axis=1))


def build_fcg(m: Mrng, features) -> FeaturedContractGraph:
    """``features`` is a sequence of vectors or an (N_F, c0) tensor, in function order."""
    if isinstance(features, Tensor):
        z0 = features
    else:
        width = features[0].size if len(features) else 0
        z0 = ops.concat([ops.reshape(f, (1, width)) for f in features], axis=0) if len(features) else None
    count = 0 if z0 is None else z0.shape[0]
    if count != len(m.functions):
        raise LengthMismatch(f"{count} feature vectors for {len(m.functions)} functions")
    adj, deg = fcg_adjacency(count, m.calls)
    return FeaturedContractGraph(z0, adj, deg)


def nested_gcn_layer(z: Tensor, fcg: FeaturedContractGraph, weight: Tensor) -> Tensor:
    """relu(D^-1 A Z W) with the row-normalized adjacency."""
    if z.ndim != 2 or z.shape[0] != fcg.adjacency.shape[0] or weight.shape[0] != z.shape[1]:
        raise ShapeMismatch(f"nested_gcn_layer: Z {z.shape}, A {fcg.adjacency.shape}, W {weight.shape}")
    return ops.relu(ops.matmul(ops.matmul(Tensor(fcg.propagation), z), weight))


def classify_functions(
    z: Tensor, conv_weight: Tensor, conv_bias: Tensor, fc_weight: Tensor, fc_bias: Tensor
) -> Tensor:
    """Per-row 1-D convolution over features, global max per filter, affine, sigmoid."""
    nf, c = z.shape
    kernel = conv_weight.shape[0]
    if c < kernel:
        raise ShapeMismatch(f"classifier input width {c} below kernel size {kernel}")
    windows = np.arange(c - kernel + 1)[:, None] + np.arange(kernel)[None, :]
    patches = ops.transpose(ops.embedding_gather(ops.transpose(z), windows), (2, 0, 1))  # (N_F, W, k)
    maps = ops.add(ops.matmul(patches, conv_weight), conv_bias)  # (N_F, W, filters)
    pooled = ops.max_(maps, axis=1)
    logits = ops.add(ops.matmul(pooled, fc_weight), fc_bias)
    return ops.reshape(ops.sigmoid(logits), (nf,))


def compute_loss(probs: Tensor, labels, pos_weight: Optional[float] = None) -> Tensor:
    """Mean binary cross entropy; probabilities clamped to [1e-12, 1 - 1e-12]."""
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if probs.size != y.size:
        raise LengthMismatch(f"{probs.size} probabilities for {y.size} labels")
    if y.size == 0:
        raise LengthMismatch("compute_loss needs at least one label")
    p = ops.clip(ops.reshape(probs, (y.size,)), PROB_FLOOR, 1.0 - PROB_FLOOR)
    pos = y if pos_weight is None else y * pos_weight
    terms = ops.add(ops.mul(ops.log(p), pos), ops.mul(ops.log(ops.sub(1.0, p)), 1.0 - y))
    return ops.mul(ops.mean(terms), -1.0)
