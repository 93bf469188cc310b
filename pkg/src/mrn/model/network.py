"""The full network: function encoder, nested stage and classifier head."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..graph.types import Mrfg, Mrng
from ..graph.vocab import Vocabulary
from ..tensor import Tensor, ops
from . import layers
from .config import ModelConfig


def parameter_shapes(config: ModelConfig, vocab: Vocabulary) -> dict[str, tuple[tuple[int, ...], int]]:
    """Parameter name -> (shape, fan_in) in a fixed order."""
    f, p = config.f_hidden, config.p
    shapes: dict[str, tuple[tuple[int, ...], int]] = {
        "node_embedding": ((vocab.n_nodes, f), 1),
        "edge_embedding": ((vocab.n_edges, p), 1),
    }
    for i in range(config.layers):
        shapes[f"eegcn.{i}.weight"] = ((f, f // p), f)
        shapes[f"eegcn.{i}.attn"] = ((2 * (f // p),), 2 * (f // p))
    if not config.no_self_attention:
        for name in ("query", "key", "value", "output"):
            shapes[f"fusion.{name}"] = ((f, f), f)
    shapes["readout.weight"] = ((config.k_prime * f, config.c0), config.k_prime * f)
    shapes["readout.bias"] = ((config.c0,), config.k_prime * f)
    if not config.no_nested:
        width = config.c0
        for t in range(config.nested_layers):
            shapes[f"nested.{t}.weight"] = ((width, config.nested_width), width)
            width = config.nested_width
    k = config.conv_kernel
    shapes["classifier.conv_weight"] = ((k, config.conv_filters), k)
    shapes["classifier.conv_bias"] = ((config.conv_filters,), k)
    shapes["classifier.fc_weight"] = ((config.conv_filters, 1), config.conv_filters)
    shapes["classifier.fc_bias"] = ((1,), config.conv_filters)
    return shapes


def init_parameters(config: ModelConfig, vocab: Vocabulary, seed: Optional[int] = None) -> dict[str, Tensor]:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)); embedding tables use fan_in 1."""
    rng = np.random.default_rng(config.seed if seed is None else seed)
    params = {}
    for name, (shape, fan_in) in parameter_shapes(config, vocab).items():
        bound = 1.0 / np.sqrt(fan_in)
        params[name] = Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True, name=name)
    return params


class MrnGcn:
    """Parameters plus vocabulary; ``forward`` maps an Mrng to per-function probabilities."""

    def __init__(self, config: ModelConfig, vocab: Vocabulary, params: Optional[dict[str, Tensor]] = None):
        self.config = config
        self.vocab = vocab
        self.params = init_parameters(config, vocab) if params is None else params
        expected = parameter_shapes(config, vocab)
        if list(self.params) != list(expected):
            missing = sorted(set(expected) ^ set(self.params))
            raise ValueError(f"parameter inventory mismatch: {missing or 'order differs'}")
        for name, (shape, _) in expected.items():
            if self.params[name].shape != shape:
                raise ValueError(f"parameter {name} has shape {self.params[name].shape}, expected {shape}")
        self._prepared: dict[int, tuple] = {}

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def prepare(self, graphs: Sequence[Mrfg]) -> tuple[layers.GraphInputs, list[int]]:
        """Merged block-diagonal inputs for ``graphs``, cached per graph tuple."""
        key = tuple(id(g) for g in graphs)
        cached = self._prepared.get(key)
        if cached is None or any(a is not b for a, b in zip(cached[0], graphs)):
            parts = [layers.prepare_graph(g, self.vocab, self.config.p) for g in graphs]
            cached = (tuple(graphs), layers.merge_graphs(parts))
            self._prepared[key] = cached
        return cached[1]

    def clear_cache(self) -> None:
        self._prepared.clear()

    def layer_outputs(self, graphs: Sequence[Mrfg], train: bool = False, rng=None) -> list[Tensor]:
        """Outputs of every edge-enhanced layer over the union of ``graphs``.

        Graphs share no edges, so running them together equals running them one by one.
        """
        cfg, par = self.config, self.params
        inputs, _ = self.prepare(graphs)
        x, e = layers.embed_graph(inputs, par["node_embedding"], par["edge_embedding"])
        outs = []
        for i in range(cfg.layers):
            x, e = layers.eegcn_layer(
                x,
                e,
                par[f"eegcn.{i}.weight"],
                par[f"eegcn.{i}.attn"],
                cfg.leaky_slope,
                cfg.eps,
                cfg.dropout,
                train,
                rng,
            )
            outs.append(x)
        return outs

    def function_features(self, graphs: Sequence[Mrfg], train: bool = False, rng=None) -> Tensor:
        """(len(graphs), c0) feature matrix."""
        cfg, par = self.config, self.params
        outs = self.layer_outputs(graphs, train, rng)
        if cfg.no_self_attention:
            fused = outs[-1]
        else:
            fused = layers.fuse_layers(
                outs, par["fusion.query"], par["fusion.key"], par["fusion.value"], par["fusion.output"], cfg.heads
            )
            fused = ops.dropout(fused, cfg.dropout, train, rng)
        _, offsets = self.prepare(graphs)
        pooled = [
            layers.sort_pool(ops.slice_(fused, slice(start, start + len(g.nodes))), cfg.k_prime)
            for start, g in zip(offsets, graphs)
        ]
        return layers.readout(pooled, par["readout.weight"], par["readout.bias"])

    def function_feature(self, g: Mrfg, train: bool = False, rng=None) -> Tensor:
        return ops.reshape(self.function_features([g], train, rng), (self.config.c0,))

    def forward(self, m: Mrng, train: bool = False, seed: Optional[int] = None) -> Tensor:
        """Per-function probabilities, shape (N_F,). ``seed`` drives dropout in training mode."""
        cfg, par = self.config, self.params
        if not m.functions:
            return Tensor(np.zeros(0))
        rng = np.random.default_rng(0 if seed is None else seed) if train else None
        fcg = layers.build_fcg(m, self.function_features(m.functions, train, rng))
        z = fcg.z0
        if not cfg.no_nested:
            for t in range(cfg.nested_layers):
                z = layers.nested_gcn_layer(z, fcg, par[f"nested.{t}.weight"])
        return layers.classify_functions(
            z,
            par["classifier.conv_weight"],
            par["classifier.conv_bias"],
            par["classifier.fc_weight"],
            par["classifier.fc_bias"],
        )


def model_forward(m: Mrng, model: MrnGcn, train: bool = False, seed: Optional[int] = None) -> np.ndarray:
    return model.forward(m, train, seed).data.copy()
