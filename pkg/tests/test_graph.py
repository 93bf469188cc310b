import json

import pytest

from mrn.errors import EmptyCorpus, FormatError
from mrn.frontend import list_functions, parse_source
from mrn.graph import (
    UNK_EDGE,
    build_mrfg,
    build_mrng,
    build_vocabulary,
    deserialize_graph,
    extract_call_edges,
    prune_ast,
    serialize_graph,
    to_dot,
)

from conftest import GOLDEN, golden_sources


def graph_of(src: bytes, name=None):
    ast = parse_source(src)
    fns = list_functions(ast)
    fn = fns[0] if name is None else next(f for f in fns if f.name == name)
    return build_mrfg(fn, ast)


def mrng_of(src: bytes):
    return build_mrng(parse_source(src), contract="t")


def golden_mrng(stem):
    return build_mrng(parse_source((GOLDEN / f"{stem}.sol").read_bytes()), contract=stem)


def labelled(g, category, subtype=None):
    return [(g.labels[e.src], g.labels[e.dst]) for e in g.edges_of(category, subtype)]


# -- pruning ---------------------------------------------------------------


def test_prune_keeps_type_text():
    ast = parse_source(b"contract C { function f(uint a) public { } }")
    (fn,) = list_functions(ast)
    tree = prune_ast(fn, ast)
    decls = [n for n in tree.walk() if n.kind == "VariableDeclaration"]
    assert [d.type_text for d in decls] == ["uint"]
    assert all(n.kind != "ElementaryTypeName" for n in tree.walk())


def test_prune_splices_expression_statement():
    ast = parse_source(b"contract C { uint t; function f() public { t = 1; } }")
    (fn,) = list_functions(ast)
    kinds = [n.kind for n in prune_ast(fn, ast).walk()]
    assert "ExpressionStatement" not in kinds
    assert "Assignment" in kinds


def test_prune_fixpoint():
    ast = parse_source(b"contract C { uint t; function f(uint a) public { t = a; } }")
    (fn,) = list_functions(ast)
    once = prune_ast(fn, ast)
    assert [n.kind for n in once.walk()] == [n.kind for n in prune_ast(fn, ast).walk()]


# -- MRFG ------------------------------------------------------------------


def test_subtraction_left_right():
    g = golden_mrng("uint_subtraction").functions[0]
    minus = g.labels.index("-")
    outgoing = [e for e in g.edges_of("Fields") if e.src == minus]
    assert sorted((e.subtype, g.labels[e.dst]) for e in outgoing) == [("left", "a"), ("right", "b")]


def test_subtraction_data_types():
    g = golden_mrng("uint_subtraction").functions[0]
    assert sorted(labelled(g, "DataType", "uint"))[:2] == [("Parameters", "a"), ("Parameters", "b")]


def test_empty_body_chain():
    g = graph_of(b"contract C { function f() public { } }")
    assert g.labels == ["entry", "Parameters", "ReturnParameters"]
    seq = g.edges_of("ControlInfo", "sequential")
    assert [(e.src, e.dst, e.seq) for e in seq] == [(0, 1, 0), (1, 2, 1)]
    assert len(g.edges_of("SelfLoop")) == 3


def test_compute_from_declaration():
    g = graph_of(b"contract C { function f(uint a, uint b) public returns (uint) { uint s = a - b; return s; } }")
    assert sorted(labelled(g, "DataFlow", "compute_from")) == [("s", "-"), ("s", "a"), ("s", "b")]


def test_return_value_from():
    g = graph_of(b"contract C { function f(uint a, uint b) public returns (uint) { uint s = a - b; return s; } }")
    ret = g.labels.index("return")
    s_ref = next(e.dst for e in g.edges_of("Fields") if e.src == ret)
    decl = g.labels.index("s")
    assert g.labels[s_ref] == "s" and s_ref != decl
    assert (s_ref, decl) in [(e.src, e.dst) for e in g.edges_of("DataFlow", "value_from")]


def test_undeclared_name_has_no_value_from():
    g = graph_of(b"contract C { function f() public { oracle; } }")
    at = g.labels.index("oracle")
    assert not [e for e in g.edges_of("DataFlow") if e.src == at]


def test_sequential_gapless():
    for path in golden_sources():
        for g in build_mrng(parse_source(path.read_bytes())).functions:
            seqs = sorted(e.seq for e in g.edges_of("ControlInfo", "sequential"))
            assert seqs == list(range(len(seqs))), (path.name, g.name)


def test_fallback_on_call_value():
    m = golden_mrng("reentrancy_attacker_victim")
    withdraw = next(g for g in m.functions if g.name == "withdraw")
    edges = withdraw.edges_of("Fallback")
    assert len(edges) == 1 and edges[0].dst == 0 and withdraw.labels[0] == "entry"


def test_no_transfer_no_fallback():
    g = golden_mrng("uint_subtraction").functions[0]
    assert g.edges_of("Fallback") == []


def test_fallback_per_site():
    g = graph_of(b"contract C { function f(address a, address b) public { a.transfer(1); b.transfer(2); } }")
    edges = g.edges_of("Fallback")
    assert len(edges) == 2 and {e.dst for e in edges} == {0}


# -- calls and MRNG ----------------------------------------------------------


def test_count_calls_add():
    m = golden_mrng("call_overflow_count_add")
    assert [f.name for f in m.functions] == ["add", "count"]
    assert m.calls == [(1, 0)]


def test_self_recursion():
    m = mrng_of(b"contract C { function f() public { f(); } }")
    assert m.calls == [(0, 0)]


def test_external_call_has_no_edge():
    src = b"contract C { address erc20; function f(address a) public { erc20.transferFrom(a, a, 1); } }"
    assert mrng_of(src).calls == []
    assert extract_call_edges(parse_source(src)) == []


def test_single_function():
    m = golden_mrng("uint_subtraction")
    assert len(m.functions) == 1 and m.calls == []


def test_attacker_victim():
    m = golden_mrng("reentrancy_attacker_victim")
    names = [(g.contract, g.name) for g in m.functions]
    assert names == [("Victim", "deposit"), ("Victim", "withdraw"), ("Attacker", "attack"), ("Attacker", "")]
    assert (2, 1) in m.calls


# -- vocabulary ------------------------------------------------------------


def test_vocab_entry_stable_and_unk():
    corpus = [golden_mrng(p.stem) for p in golden_sources()]
    v = build_vocabulary(corpus, min_frequency=2)
    assert v.node_id("entry") >= 2
    assert v.node_id("entry") == build_vocabulary(corpus, min_frequency=2).node_id("entry")
    once = mrng_of(b"contract C { function f() public { zzzUniqueName; } }")
    v1 = build_vocabulary([once], min_frequency=2)
    assert v1.node_id("zzzUniqueName") == 0


def test_vocab_deterministic():
    corpus = [golden_mrng(p.stem) for p in golden_sources()]
    assert build_vocabulary(corpus) == build_vocabulary(corpus)


def test_vocab_empty_corpus():
    with pytest.raises(EmptyCorpus):
        build_vocabulary([])


# -- interchange -------------------------------------------------------------


@pytest.mark.parametrize("path", golden_sources(), ids=lambda p: p.name)
def test_serialize_round_trip(path):
    m = build_mrng(parse_source(path.read_bytes()), contract=path.stem)
    assert deserialize_graph(serialize_graph(m)) == m


def test_truncated_bytes():
    data = serialize_graph(golden_mrng("uint_subtraction"))
    with pytest.raises(FormatError):
        deserialize_graph(data[: len(data) // 2])


def test_unknown_subtype_maps_to_unk():
    doc = json.loads(serialize_graph(golden_mrng("uint_subtraction")))
    edge = next(e for e in doc["functions"][0]["edges"] if e["category"] == "Fields")
    edge["subtype"] = "sideways"
    m = deserialize_graph(json.dumps(doc))
    assert any(e.subtype == UNK_EDGE for e in m.functions[0].edges)
    assert m.warnings


def test_dot_left_right():
    dot = to_dot(golden_mrng("uint_subtraction").functions[0])
    assert 'label="left"' in dot and 'label="right"' in dot


def test_dot_empty_body():
    dot = to_dot(graph_of(b"contract C { function f() public { } }"))
    assert dot.count("label=") >= 3
    assert "entry" in dot and "ReturnParameters" in dot


def test_dot_clusters():
    dot = to_dot(golden_mrng("call_overflow_count_add"))
    assert dot.count("subgraph cluster_") == 2
