import io
import json
import math
import zipfile
from dataclasses import replace

import numpy as np
import pytest

from mrn.errors import FormatError, LengthMismatch, VersionError
from mrn.frontend import parse_source
from mrn.graph import Edge, Mrfg, Mrng, build_mrng, build_vocabulary
from mrn.model import (
    ModelCheckpoint,
    ModelConfig,
    MrnGcn,
    load_checkpoint,
    model_forward,
    parameter_shapes,
    save_checkpoint,
)
from mrn.model import layers
from mrn.tensor import Tensor, ops

from conftest import GOLDEN, golden_sources

SMALL = ModelConfig(
    f_hidden=8, p=2, layers=3, heads=2, k_prime=4, c0=8, nested_width=8, conv_kernel=3, conv_filters=2, dropout=0.0
)


def golden(stem):
    return build_mrng(parse_source((GOLDEN / f"{stem}.sol").read_bytes()), contract=stem)


@pytest.fixture(scope="module")
def corpus():
    return [golden(p.stem) for p in golden_sources()]


@pytest.fixture(scope="module")
def vocab(corpus):
    return build_vocabulary(corpus)


# -- positional encoding -------------------------------------------------------


def test_pe_zero_position():
    pe = layers.positional_encoding(0, 8)
    assert pe.tolist() == [0.0, 1.0] * 4


def test_pe_values():
    assert abs(layers.positional_encoding(1, 8)[0] - math.sin(1.0)) < 1e-9
    assert abs(layers.positional_encoding(1, 8)[0] - 0.841471) < 1e-6
    assert abs(layers.positional_encoding(2, 8)[2] - math.sin(2 / 10000 ** (2 / 8))) < 1e-9
    assert abs(layers.positional_encoding(2, 8)[2] - 0.198669) < 1e-6


# -- embedding ---------------------------------------------------------------


def _tiny_graph(label="entry"):
    return Mrfg(
        "f",
        0,
        [(0, label), (1, "Parameters")],
        [Edge(0, 1, "ControlInfo", "sequential", 0)],
    )


def test_embed_rules(vocab):
    g = _tiny_graph("neverSeenToken")
    nodes = Tensor(np.random.default_rng(0).normal(size=(vocab.n_nodes, 4)))
    edges = Tensor(np.random.default_rng(1).normal(size=(vocab.n_edges, 4)))
    x0, e0 = layers.embed_graph(layers.prepare_graph(g, vocab, 4), nodes, edges)
    assert np.array_equal(x0.data[0], nodes.data[0])
    assert np.array_equal(e0.data[1, 0], np.zeros(4))
    seq = edges.data[vocab.edge_id("ControlInfo:sequential")]
    assert np.allclose(e0.data[0, 1], seq + np.array([0.0, 1.0, 0.0, 1.0]))


# -- edge-enhanced layer ------------------------------------------------------


def test_eegcn_zero_edges():
    rng = np.random.default_rng(0)
    x = Tensor(rng.normal(size=(3, 4)))
    out, _ = layers.eegcn_layer(x, Tensor(np.zeros((3, 3, 2))), Tensor(rng.normal(size=(4, 2))), Tensor(rng.normal(size=4)))
    assert np.array_equal(out.data, np.zeros((3, 4)))


def test_eegcn_single_self_loop():
    rng = np.random.default_rng(0)
    x, w = rng.normal(size=(1, 4)), rng.normal(size=(4, 2))
    e = np.full((1, 1, 2), 0.7)
    out, coef = layers.eegcn_layer(Tensor(x), Tensor(e), Tensor(w), Tensor(np.zeros(4)))
    assert np.allclose(coef.data, 1.0)
    assert np.allclose(out.data, np.maximum(np.tile(x @ w, 2), 0.0))


# -- layer fusion ---------------------------------------------------------------


def test_fusion_single_layer_identity():
    x = Tensor(np.random.default_rng(0).normal(size=(5, 4)))
    eye = Tensor(np.eye(4))
    out = layers.fuse_layers([x], eye, eye, eye, eye, heads=2)
    assert np.allclose(out.data, x.data)


def test_fusion_identical_layers():
    v = np.random.default_rng(1).normal(size=(3, 4))
    eye = Tensor(np.eye(4))
    out, weights = layers.fuse_layers([Tensor(v)] * 4, eye, eye, eye, eye, heads=2, return_weights=True)
    assert np.allclose(out.data, v)
    assert np.allclose(weights.data.sum(axis=-1), 1.0, atol=1e-12)


# -- sort pooling ---------------------------------------------------------------


def test_sort_pool_examples():
    assert layers.sort_pool(Tensor([[1.0, 2.0], [3.0, 4.0]]), 1).data.tolist() == [[3.0, 4.0]]
    assert layers.sort_pool(Tensor([[5.0, 7.0], [9.0, 7.0]]), 2).data.tolist() == [[9.0, 7.0], [5.0, 7.0]]
    assert layers.sort_pool(Tensor([[2.0, 2.0]]), 3).data.tolist() == [[2.0, 2.0], [0.0, 0.0], [0.0, 0.0]]


def test_feature_shape_and_duplicates(vocab, corpus):
    model = MrnGcn(SMALL, vocab)
    for m in corpus:
        for g in m.functions:
            assert model.function_feature(g).shape == (SMALL.c0,)
    src = b"contract C { function f(uint a) public returns (uint) { return a + 1; } function g(uint a) public returns (uint) { return a + 1; } }"
    m = build_mrng(parse_source(src))
    feats = model.function_features(m.functions).data
    # names differ, but only the entry/body tokens enter the graph
    assert np.array_equal(feats[0], feats[1])


# -- featured contract graph ----------------------------------------------------


def test_fcg_adjacency_examples():
    adj, deg = layers.fcg_adjacency(2, [(0, 1)])
    assert adj.tolist() == [[1, 1], [1, 1]] and np.diag(deg).tolist() == [2, 2]
    adj, deg = layers.fcg_adjacency(1, [])
    assert adj.tolist() == [[1]] and deg.tolist() == [[1]]
    assert np.array_equal(layers.fcg_adjacency(3, [])[0], np.eye(3))


def _fcg(z, calls):
    m = Mrng("c", [None] * z.shape[0], calls)
    return layers.build_fcg(m, Tensor(z))


def test_nested_single_node():
    z = np.array([[0.5, 2.0, 0.0]])
    out = layers.nested_gcn_layer(Tensor(z), _fcg(z, []), Tensor(np.eye(3)))
    assert np.array_equal(out.data, z)


def test_nested_two_nodes_average():
    z = np.array([[1.0, -4.0], [3.0, 2.0]])
    out = layers.nested_gcn_layer(Tensor(z), _fcg(z, [(0, 1)]), Tensor(np.eye(2)))
    assert np.allclose(out.data, np.maximum([[2.0, -1.0], [2.0, -1.0]], 0.0))


@pytest.mark.parametrize("seed", range(5))
def test_nested_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    z, w = rng.normal(size=(3, 4)), rng.normal(size=(4, 5))
    calls = [(0, 1)] if seed % 2 else [(2, 0), (1, 2)]
    adj = np.eye(3)
    for a, b in calls:
        adj[a, b] = adj[b, a] = 1.0
    expected = np.maximum(np.linalg.inv(np.diag(adj.sum(axis=1))) @ adj @ z @ w, 0.0)
    out = layers.nested_gcn_layer(Tensor(z), _fcg(z, calls), Tensor(w))
    assert np.max(np.abs(out.data - expected)) < 1e-12


def test_fcg_length_mismatch():
    with pytest.raises(LengthMismatch):
        layers.build_fcg(Mrng("c", [None, None], []), Tensor(np.zeros((3, 4))))


# -- classifier and loss --------------------------------------------------------


def test_classifier_zero_weights():
    z = Tensor(np.random.default_rng(0).normal(size=(3, 8)))
    probs = layers.classify_functions(z, Tensor(np.zeros((3, 2))), Tensor(np.zeros(2)), Tensor(np.zeros((2, 1))), Tensor(np.zeros(1)))
    assert probs.data.tolist() == [0.5, 0.5, 0.5]


def test_classifier_identical_rows():
    rng = np.random.default_rng(0)
    z = Tensor(np.tile(rng.normal(size=(1, 8)), (3, 1)))
    probs = layers.classify_functions(
        z, Tensor(rng.normal(size=(3, 2))), Tensor(rng.normal(size=2)), Tensor(rng.normal(size=(2, 1))), Tensor(rng.normal(size=1))
    ).data
    assert probs[0] == probs[1] == probs[2]


def test_loss_values():
    assert layers.compute_loss(Tensor([0.5]), [1]).item() == pytest.approx(0.693147, abs=1e-6)
    assert layers.compute_loss(Tensor([0.5, 0.5]), [1, 0]).item() == pytest.approx(0.693147, abs=1e-6)
    assert layers.compute_loss(Tensor([0.9]), [1]).item() == pytest.approx(0.105361, abs=1e-6)


def test_loss_length_mismatch():
    with pytest.raises(LengthMismatch):
        layers.compute_loss(Tensor([0.5]), [1, 0])


# -- full network ---------------------------------------------------------------


def test_output_length(vocab, corpus):
    model = MrnGcn(SMALL, vocab)
    for m in corpus:
        probs = model.forward(m).data
        assert probs.shape == (len(m.functions),)
        assert np.all((probs > 0) & (probs < 1))


def test_function_permutation_equivariance(vocab):
    m = golden("call_chain")
    model = MrnGcn(SMALL, vocab)
    perm = [2, 0, 1]
    inverse = {old: new for new, old in enumerate(perm)}
    permuted = Mrng(m.contract, [m.functions[i] for i in perm], [(inverse[a], inverse[b]) for a, b in m.calls])
    assert np.allclose(model.forward(permuted).data, model.forward(m).data[perm], atol=1e-12)


def test_no_nested_matches_identity_stack(vocab):
    m = golden("uint_subtraction")
    full = MrnGcn(SMALL, vocab)
    for t in range(SMALL.nested_layers):
        full.params[f"nested.{t}.weight"].data = np.eye(SMALL.c0)
    flat_cfg = replace(SMALL, no_nested=True)
    flat = MrnGcn(flat_cfg, vocab, {k: v for k, v in full.params.items() if not k.startswith("nested.")})
    assert np.array_equal(flat.forward(m).data, full.forward(m).data)


def test_ablation_inventories(vocab):
    full = set(parameter_shapes(SMALL, vocab))
    no_nested = set(parameter_shapes(replace(SMALL, no_nested=True), vocab))
    no_sa = set(parameter_shapes(replace(SMALL, no_self_attention=True), vocab))
    assert full - no_nested == {f"nested.{t}.weight" for t in range(SMALL.nested_layers)}
    assert full - no_sa == {f"fusion.{n}" for n in ("query", "key", "value", "output")}


def test_dropout_only_in_training(vocab):
    m = golden("call_overflow_count_add")
    model = MrnGcn(replace(SMALL, dropout=0.5), vocab)
    assert np.array_equal(model.forward(m).data, model.forward(m).data)
    assert np.array_equal(model.forward(m, True, 3).data, model.forward(m, True, 3).data)
    assert not np.array_equal(model.forward(m, True, 3).data, model.forward(m).data)


# -- checkpoints -----------------------------------------------------------------


def test_checkpoint_round_trip(tmp_path, vocab):
    m = golden("reentrancy_attacker_victim")
    model = MrnGcn(SMALL, vocab)
    path = tmp_path / "m.ckpt"
    save_checkpoint(ModelCheckpoint(model, {"epoch": 3}), path)
    loaded = load_checkpoint(path)
    assert loaded.metadata == {"epoch": 3}
    assert loaded.parameter_names() == list(model.params)
    assert np.array_equal(model_forward(m, loaded.model), model_forward(m, model))


def test_checkpoint_corrupted(tmp_path, vocab):
    path = tmp_path / "m.ckpt"
    save_checkpoint(ModelCheckpoint(MrnGcn(SMALL, vocab)), path)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 3])
    with pytest.raises(FormatError):
        load_checkpoint(path)


def test_checkpoint_version(tmp_path, vocab):
    path = tmp_path / "m.ckpt"
    save_checkpoint(ModelCheckpoint(MrnGcn(SMALL, vocab)), path)
    with zipfile.ZipFile(path) as zf:
        files = {name: zf.read(name) for name in zf.namelist()}
    meta = json.loads(files["meta.json"])
    meta["format"] = "mrn-ckpt/999"
    files["meta.json"] = json.dumps(meta).encode()
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for name, blob in files.items():
            zf.writestr(name, blob)
    path.write_bytes(buf.getvalue())
    with pytest.raises(VersionError):
        load_checkpoint(path)


def test_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(f_hidden=10, p=3)
