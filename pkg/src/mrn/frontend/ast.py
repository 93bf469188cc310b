"""Normalized syntax tree and its ``mrn-ast/1`` JSON interchange form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Optional

from ..errors import FormatError

AST_FORMAT = "mrn-ast/1"

# Closed node-kind vocabulary for mrn-ast/1. Adding a kind requires a format bump.
NODE_KINDS = (
    "SourceUnit",
    "ContractDefinition",
    "FunctionDefinition",
    "Parameters",
    "ReturnParameters",
    "VariableDeclaration",
    "VariableDeclarationStatement",
    "ElementaryTypeName",
    "TypeName",
    "Block",
    "ExpressionStatement",
    "IfStatement",
    "WhileStatement",
    "ForStatement",
    "Return",
    "Require",
    "EmitStatement",
    "Break",
    "Continue",
    "Throw",
    "Assignment",
    "BinaryOperation",
    "UnaryOperation",
    "Conditional",
    "FunctionCall",
    "FunctionCallOptions",
    "MemberAccess",
    "IndexAccess",
    "Identifier",
    "Literal",
    "TupleExpression",
    "NewExpression",
    "Unsupported",
)
KIND_SET = frozenset(NODE_KINDS)

# FunctionDefinition.text markers for nameless functions.
FALLBACK_MARK = "<fallback>"
RECEIVE_MARK = "<receive>"
CONSTRUCTOR_MARK = "<constructor>"

Span = tuple[int, int, int, int]


@dataclass(frozen=True)
class AstNode:
    id: int
    kind: str
    text: Optional[str]
    children: tuple[int, ...]
    span: Span


@dataclass(frozen=True)
class NormalizedAst:
    nodes: tuple[AstNode, ...]
    root: int
    path: str = field(default="", compare=False)

    def __getitem__(self, node_id: int) -> AstNode:
        return self.nodes[node_id]

    def __len__(self) -> int:
        return len(self.nodes)

    def walk(self, start: Optional[int] = None) -> Iterator[AstNode]:
        """Pre-order traversal from ``start`` (default: root)."""
        stack = [self.root if start is None else start]
        while stack:
            node = self.nodes[stack.pop()]
            yield node
            stack.extend(reversed(node.children))

    def parents(self) -> dict[int, int]:
        return {c: n.id for n in self.nodes for c in n.children}

    def to_json(self) -> dict:
        return {
            "format": AST_FORMAT,
            "nodes": [
                {
                    "id": n.id,
                    "kind": n.kind,
                    "text": n.text,
                    "children": list(n.children),
                    "span": list(n.span),
                }
                for n in self.nodes
            ],
            "root": self.root,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"


@dataclass(frozen=True)
class FunctionAst:
    name: str
    arity: int
    root: int
    is_fallback: bool = False
    is_constructor: bool = False
    contract: str = ""


def renumber_preorder(nodes: dict[int, AstNode], root: int, path: str = "") -> NormalizedAst:
    """Reassign ids densely in pre-order so the root becomes 0."""
    order: list[int] = []
    stack = [root]
    while stack:
        nid = stack.pop()
        order.append(nid)
        stack.extend(reversed(nodes[nid].children))
    new_id = {old: i for i, old in enumerate(order)}
    out = [
        AstNode(
            new_id[old],
            nodes[old].kind,
            nodes[old].text,
            tuple(new_id[c] for c in nodes[old].children),
            nodes[old].span,
        )
        for old in order
    ]
    return NormalizedAst(tuple(out), 0, path)


def _expect(cond: bool, message: str, path: str) -> None:
    if not cond:
        raise FormatError(message, path)


def ingest_ast_json(data: bytes | str, path: str = "") -> NormalizedAst:
    """Load an ``mrn-ast/1`` document.

    Node kinds outside the vocabulary are kept as ``Unsupported`` leaves; their
    subtrees are discarded and the remaining ids renumbered.
    """
    try:
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"not valid JSON ({exc})") from exc
    _expect(isinstance(doc, dict), "expected an object", "$")
    _expect(doc.get("format") == AST_FORMAT, f"format must be {AST_FORMAT!r}", "$.format")
    raw_nodes = doc.get("nodes")
    _expect(isinstance(raw_nodes, list) and raw_nodes, "expected a non-empty list", "$.nodes")
    root = doc.get("root")
    _expect(isinstance(root, int) and not isinstance(root, bool), "expected an integer", "$.root")

    nodes: dict[int, AstNode] = {}
    unknown = False
    for i, raw in enumerate(raw_nodes):
        where = f"$.nodes[{i}]"
        _expect(isinstance(raw, dict), "expected an object", where)
        nid = raw.get("id")
        _expect(isinstance(nid, int) and not isinstance(nid, bool), "expected an integer", where + ".id")
        _expect(nid not in nodes, f"duplicate id {nid}", where + ".id")
        kind = raw.get("kind")
        _expect(isinstance(kind, str), "expected a string", where + ".kind")
        text = raw.get("text")
        _expect(text is None or isinstance(text, str), "expected a string or null", where + ".text")
        children = raw.get("children")
        _expect(isinstance(children, list), "expected a list", where + ".children")
        for j, c in enumerate(children):
            _expect(isinstance(c, int) and not isinstance(c, bool), "expected an integer", f"{where}.children[{j}]")
        span = raw.get("span")
        _expect(
            isinstance(span, list) and len(span) == 4 and all(isinstance(v, int) for v in span),
            "expected four integers",
            where + ".span",
        )
        if kind not in KIND_SET:
            unknown = True
        nodes[nid] = AstNode(nid, kind, text, tuple(children), tuple(span))

    _expect(sorted(nodes) == list(range(len(nodes))), "ids must be dense 0..N-1", "$.nodes")
    _expect(root in nodes, f"root {root} is not a node", "$.root")
    parent: dict[int, int] = {}
    for i, raw in enumerate(raw_nodes):
        node = nodes[raw["id"]]
        for j, c in enumerate(node.children):
            where = f"$.nodes[{i}].children[{j}]"
            _expect(c in nodes, f"child {c} references a missing node", where)
            _expect(c != root, "root cannot be a child", where)
            _expect(c not in parent, f"node {c} has more than one parent", where)
            parent[c] = node.id
    _expect(len(parent) == len(nodes) - 1, "nodes unreachable from root", "$.nodes")
    # single parent + N-1 parent links + every node reachable => tree
    seen = {n.id for n in NormalizedAst(tuple(nodes[i] for i in range(len(nodes))), root).walk()}
    _expect(len(seen) == len(nodes), "child links contain a cycle", "$.nodes")

    if not unknown:
        return NormalizedAst(tuple(nodes[i] for i in range(len(nodes))), root, path)

    for nid, node in list(nodes.items()):
        if node.kind not in KIND_SET:
            nodes[nid] = AstNode(nid, "Unsupported", node.kind, (), node.span)
    return renumber_preorder(nodes, root, path)
