"""``mrn-graph/1`` JSON serialization and Graphviz export."""

from __future__ import annotations

import json
import logging

from ..errors import FormatError
from .types import CATEGORIES, CONTROL, UNK_EDGE, Edge, Mrfg, Mrng, is_known_subtype

GRAPH_FORMAT = "mrn-graph/1"

log = logging.getLogger(__name__)


def graph_to_json(g: Mrng) -> dict:
    return {
        "format": GRAPH_FORMAT,
        "contract": g.contract,
        "functions": [
            {
                "name": f.name,
                "arity": f.arity,
                "nodes": [{"id": i, "label": label} for i, label in f.nodes],
                "edges": [
                    {"src": e.src, "dst": e.dst, "category": e.category, "subtype": e.subtype, "seq": e.seq}
                    for e in f.edges
                ],
            }
            for f in g.functions
        ],
        "calls": [{"caller": a, "callee": b} for a, b in g.calls],
    }


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def serialize_graph(g: Mrng) -> bytes:
    return canonical_json(graph_to_json(g)).encode("utf-8")


def _int(value, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise FormatError("expected an integer", path)
    return value


def _str(value, path: str) -> str:
    if not isinstance(value, str):
        raise FormatError("expected a string", path)
    return value


def _list(value, path: str) -> list:
    if not isinstance(value, list):
        raise FormatError("expected a list", path)
    return value


def deserialize_graph(data: bytes | str) -> Mrng:
    """Inverse of :func:`serialize_graph`. Unknown edge subtypes load as ``UNK_EDGE``."""
    try:
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise FormatError("expected an object")
    if doc.get("format") != GRAPH_FORMAT:
        raise FormatError(f"format must be {GRAPH_FORMAT!r}", "$.format")
    warnings: list[str] = []
    functions = []
    for fi, fdoc in enumerate(_list(doc.get("functions"), "$.functions")):
        where = f"$.functions[{fi}]"
        if not isinstance(fdoc, dict):
            raise FormatError("expected an object", where)
        nodes = []
        for ni, ndoc in enumerate(_list(fdoc.get("nodes"), where + ".nodes")):
            nw = f"{where}.nodes[{ni}]"
            if not isinstance(ndoc, dict):
                raise FormatError("expected an object", nw)
            nid = _int(ndoc.get("id"), nw + ".id")
            if nid != ni:
                raise FormatError(f"node ids must be 0..N-1 in order, got {nid}", nw + ".id")
            nodes.append((nid, _str(ndoc.get("label"), nw + ".label")))
        edges = []
        for ei, edoc in enumerate(_list(fdoc.get("edges"), where + ".edges")):
            ew = f"{where}.edges[{ei}]"
            if not isinstance(edoc, dict):
                raise FormatError("expected an object", ew)
            src, dst = _int(edoc.get("src"), ew + ".src"), _int(edoc.get("dst"), ew + ".dst")
            for end, name in ((src, "src"), (dst, "dst")):
                if not 0 <= end < len(nodes):
                    raise FormatError(f"node {end} does not exist", f"{ew}.{name}")
            category = _str(edoc.get("category"), ew + ".category")
            if category not in CATEGORIES:
                raise FormatError(f"unknown edge category {category!r}", ew + ".category")
            subtype = _str(edoc.get("subtype"), ew + ".subtype")
            if not is_known_subtype(category, subtype):
                warnings.append(f"{ew}.subtype: unknown subtype {subtype!r} mapped to {UNK_EDGE}")
                log.warning(warnings[-1])
                subtype = UNK_EDGE
            seq = edoc.get("seq")
            if seq is not None:
                seq = _int(seq, ew + ".seq")
            elif category == CONTROL and subtype == "sequential":
                raise FormatError("sequential edges need a seq index", ew + ".seq")
            edges.append(Edge(src, dst, category, subtype, seq))
        functions.append(
            Mrfg(
                name=_str(fdoc.get("name"), where + ".name"),
                arity=_int(fdoc.get("arity"), where + ".arity"),
                nodes=nodes,
                edges=edges,
                ast_ids=[None] * len(nodes),
            )
        )
    calls = []
    seen = set()
    for ci, cdoc in enumerate(_list(doc.get("calls"), "$.calls")):
        cw = f"$.calls[{ci}]"
        if not isinstance(cdoc, dict):
            raise FormatError("expected an object", cw)
        pair = (_int(cdoc.get("caller"), cw + ".caller"), _int(cdoc.get("callee"), cw + ".callee"))
        for end in pair:
            if not 0 <= end < len(functions):
                raise FormatError(f"function {end} does not exist", cw)
        if pair in seen:
            raise FormatError("duplicate call edge", cw)
        seen.add(pair)
        calls.append(pair)
    return Mrng(_str(doc.get("contract"), "$.contract"), functions, calls, warnings)


_COLORS = {
    "DataType": "darkgreen",
    "ControlInfo": "blue",
    "Fields": "black",
    "DataFlow": "red",
    "Fallback": "purple",
    "SelfLoop": "gray",
}
_STYLES = {"DataFlow": "dashed", "Fallback": "bold", "SelfLoop": "dotted"}


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _mrfg_body(g: Mrfg, prefix: str, indent: str) -> list[str]:
    lines = [f"{indent}{prefix}{i} [label={_quote(label)}];" for i, label in g.nodes]
    for e in g.edges:
        label = e.subtype if e.seq is None else f"{e.subtype} {e.seq}"
        attrs = [f"label={_quote(label)}", f"color={_COLORS.get(e.category, 'black')}"]
        if e.category in _STYLES:
            attrs.append(f"style={_STYLES[e.category]}")
        lines.append(f"{indent}{prefix}{e.src} -> {prefix}{e.dst} [{', '.join(attrs)}];")
    return lines


def to_dot(g: Mrng | Mrfg) -> str:
    """Render a graph as a DOT digraph; an MRNG gets one cluster per function."""
    if isinstance(g, Mrfg):
        lines = [f"digraph {_quote(g.name or 'function')} {{", "  node [shape=box];"]
        lines += _mrfg_body(g, "n", "  ")
        return "\n".join(lines + ["}"]) + "\n"
    lines = [f"digraph {_quote(g.contract or 'contract')} {{", "  compound=true;", "  node [shape=box];"]
    for fi, f in enumerate(g.functions):
        lines.append(f"  subgraph cluster_{fi} {{")
        title = f"{f.name or '<fallback>'}/{f.arity}"
        lines.append(f"    label={_quote(title)};")
        lines += _mrfg_body(f, f"f{fi}_", "    ")
        lines.append("  }")
    for a, b in g.calls:
        lines.append(f"  f{a}_0 -> f{b}_0 [ltail=cluster_{a}, lhead=cluster_{b}, color=orange, label=\"call\"];")
    return "\n".join(lines + ["}"]) + "\n"
