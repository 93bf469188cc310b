"""Per-function graph construction: prune the syntax tree, then lay typed edges."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from ..frontend.ast import AstNode, FunctionAst, NormalizedAst
from .types import (
    CONTROL,
    DATA_FLOW,
    DATA_TYPE,
    ENTRY,
    FALLBACK,
    FIELDS,
    SELF_LOOP,
    Edge,
    Mrfg,
    data_type_subtype,
)

# description wrappers removed by pruning; their children are spliced into the parent
DROPPED_KINDS = frozenset({"TypeName", "ElementaryTypeName", "ExpressionStatement"})

# containers that group statements but carry no semantics of their own
_TRANSPARENT = frozenset({"Block", "FunctionDefinition"})

_STATEMENT_LABELS = {
    "VariableDeclarationStatement": "VariableDeclarationStatement",
    "IfStatement": "if",
    "WhileStatement": "while",
    "ForStatement": "for",
    "Return": "return",
    "Require": "require",
    "EmitStatement": "emit",
    "Break": "break",
    "Continue": "continue",
    "Throw": "throw",
    "Conditional": "?:",
    "FunctionCall": "FunctionCall",
    "FunctionCallOptions": "FunctionCallOptions",
    "IndexAccess": "IndexAccess",
    "TupleExpression": "TupleExpression",
    "NewExpression": "new",
    "Unsupported": "unsupported",
    "Parameters": "Parameters",
    "ReturnParameters": "ReturnParameters",
}

TRANSFER_MEMBERS = frozenset({"transfer", "send"})


@dataclass
class PrunedNode:
    ast_id: int
    kind: str
    text: Optional[str]
    children: list["PrunedNode"] = field(default_factory=list)
    type_text: Optional[str] = None

    def walk(self) -> Iterator["PrunedNode"]:
        yield self
        for c in self.children:
            yield from c.walk()


def type_string(ast: NormalizedAst, node: AstNode) -> str:
    """Canonical text of a type subtree, e.g. ``mapping(address=>uint)``."""
    if node.kind == "ElementaryTypeName":
        return node.text or ""
    if node.text == "mapping":
        key, value = (ast[c] for c in node.children)
        return f"mapping({type_string(ast, key)}=>{type_string(ast, value)})"
    if node.text == "array":
        return type_string(ast, ast[node.children[0]]) + "[]"
    return node.text or ""


def prune_subtree(ast: NormalizedAst, node_id: int) -> list[PrunedNode]:
    node = ast[node_id]
    kids: list[PrunedNode] = []
    for c in node.children:
        kids.extend(prune_subtree(ast, c))
    if node.kind in DROPPED_KINDS:
        return kids
    pruned = PrunedNode(node.id, node.kind, node.text, kids)
    if node.kind == "VariableDeclaration" and node.children:
        first = ast[node.children[0]]
        if first.kind in ("TypeName", "ElementaryTypeName"):
            pruned.type_text = type_string(ast, first)
    return [pruned]


def prune_ast(fn: FunctionAst, ast: NormalizedAst) -> PrunedNode:
    """Copy of the function subtree with description wrappers spliced out.

    The elementary/composite type of each declaration survives as ``type_text``.
    """
    (root,) = prune_subtree(ast, fn.root)
    return root


def statement_heads(node: PrunedNode) -> list[PrunedNode]:
    """Flatten nested Blocks into the statements they hold."""
    if node.kind == "Block":
        out = []
        for c in node.children:
            out.extend(statement_heads(c))
        return out
    return [node]


def flatten_statements(stmts: list[PrunedNode]) -> list[PrunedNode]:
    """Source-order statement sequence, descending into compound statement bodies."""
    out: list[PrunedNode] = []
    for stmt in stmts:
        for s in statement_heads(stmt):
            out.append(s)
            out.extend(flatten_statements(_bodies(s)))
    return out


def _bodies(stmt: PrunedNode) -> list[PrunedNode]:
    if stmt.kind == "IfStatement":
        return stmt.children[1:]
    if stmt.kind == "WhileStatement":
        return stmt.children[1:]
    if stmt.kind == "ForStatement":
        return stmt.children[-1:]
    return []


def node_label(node: PrunedNode) -> str:
    if node.kind in _STATEMENT_LABELS:
        return _STATEMENT_LABELS[node.kind]
    if node.kind == "VariableDeclaration":
        return node.text or "VariableDeclaration"
    return node.text or node.kind


def is_fallback_trigger(call: PrunedNode) -> bool:
    """True for ``x.transfer(..)``, ``x.send(..)``, ``x.call.value(..)`` and ``x.call{value: ..}``."""
    if call.kind != "FunctionCall" or not call.children:
        return False
    callee = call.children[0]
    if callee.kind == "MemberAccess":
        if callee.text in TRANSFER_MEMBERS:
            return True
        base = callee.children[0] if callee.children else None
        return callee.text == "value" and base is not None and base.kind == "MemberAccess" and base.text == "call"
    if callee.kind == "FunctionCallOptions":
        base = callee.children[0] if callee.children else None
        names = (callee.text or "").split(",")
        return "value" in names and base is not None and base.kind == "MemberAccess" and base.text == "call"
    return False


class _GraphBuilder:
    def __init__(self, fn: FunctionAst, tree: PrunedNode, state_vars: dict[str, PrunedNode]):
        self.fn = fn
        self.tree = tree
        self.state_vars = state_vars
        self.labels: list[str] = [ENTRY]
        self.ast_ids: list[Optional[int]] = [None]
        self.index: dict[int, int] = {}
        self.edges: set[Edge] = set()
        self.state_index: dict[str, int] = {}

    def add_node(self, label: str, ast_id: Optional[int]) -> int:
        self.labels.append(label)
        self.ast_ids.append(ast_id)
        return len(self.labels) - 1

    def edge(self, src: PrunedNode | int, dst: PrunedNode | int, category: str, subtype: str, seq=None):
        s = src if isinstance(src, int) else self.index[src.ast_id]
        d = dst if isinstance(dst, int) else self.index[dst.ast_id]
        self.edges.add(Edge(s, d, category, subtype, seq))

    def materialize(self) -> None:
        for node in self.tree.walk():
            if node.kind in _TRANSPARENT:
                continue
            self.index[node.ast_id] = self.add_node(node_label(node), node.ast_id)

    # (a) execution order
    def add_sequential_edges(self, params: PrunedNode, returns: PrunedNode, body: list[PrunedNode]) -> None:
        chain = [0, self.index[params.ast_id]]
        chain += [self.index[s.ast_id] for s in flatten_statements(body)]
        chain.append(self.index[returns.ast_id])
        for seq, (a, b) in enumerate(zip(chain, chain[1:])):
            self.edge(a, b, CONTROL, "sequential", seq)

    # (b)-(d) data types, field positions and control information
    def add_structural_edges(self) -> None:
        for node in self.tree.walk():
            kind, ch = node.kind, node.children
            if kind in ("Parameters", "ReturnParameters"):
                for decl in ch:
                    self._typed(node, decl)
            elif kind == "VariableDeclarationStatement":
                for c in ch:
                    if c.kind == "VariableDeclaration":
                        self._typed(node, c)
                    else:
                        self.edge(node, c, FIELDS, "operation")
            elif kind == "VariableDeclaration":
                for c in ch:  # array length expressions left behind by pruning
                    self.edge(node, c, FIELDS, "index")
            elif kind in ("Assignment", "BinaryOperation"):
                self.edge(node, ch[0], FIELDS, "left")
                self.edge(node, ch[1], FIELDS, "right")
            elif kind == "UnaryOperation":
                self.edge(node, ch[0], FIELDS, "operation")
            elif kind == "Conditional":
                self.edge(node, ch[0], FIELDS, "condition")
                self.edge(node, ch[1], FIELDS, "left")
                self.edge(node, ch[2], FIELDS, "right")
            elif kind in ("FunctionCall", "FunctionCallOptions"):
                self.edge(node, ch[0], FIELDS, "function_call")
                for arg in ch[1:]:
                    self.edge(node, arg, FIELDS, "argument")
            elif kind == "MemberAccess":
                self.edge(node, ch[0], FIELDS, "member")
            elif kind == "IndexAccess":
                self.edge(node, ch[0], FIELDS, "left")
                for idx in ch[1:]:
                    self.edge(node, idx, FIELDS, "index")
            elif kind == "TupleExpression":
                for el in ch:
                    self.edge(node, el, FIELDS, "argument")
            elif kind == "Return":
                for c in ch:
                    self.edge(node, c, FIELDS, "operation")
            elif kind == "EmitStatement":
                self.edge(node, ch[0], FIELDS, "function_call")
            elif kind == "Require":
                if ch:
                    self.edge(node, ch[0], CONTROL, "require")
                for arg in ch[1:]:
                    self.edge(node, arg, FIELDS, "argument")
            elif kind == "IfStatement":
                self.edge(node, ch[0], CONTROL, "if")
                self._heads(node, ch[1], "if")
                if len(ch) > 2:
                    self._heads(node, ch[2], "else")
            elif kind == "WhileStatement":
                self.edge(node, ch[0], CONTROL, "while")
                self._heads(node, ch[1], "while")
            elif kind == "ForStatement":
                for part in ch[:-1]:
                    self.edge(node, part, CONTROL, "for")
                self._heads(node, ch[-1], "for")

    def _typed(self, owner: PrunedNode, decl: PrunedNode) -> None:
        self.edge(owner, decl, DATA_TYPE, data_type_subtype(decl.type_text or ""))

    def _heads(self, node: PrunedNode, body: PrunedNode, subtype: str) -> None:
        heads = statement_heads(body)
        if heads:
            self.edge(node, heads[0], CONTROL, subtype)

    # (e) data flow
    def add_dataflow_edges(self, params: PrunedNode, returns: PrunedNode) -> None:
        for node in self.tree.walk():
            if node.kind == "Assignment":
                targets = [node.children[0]]
                expr = node.children[1]
            elif node.kind == "VariableDeclarationStatement" and node.children[-1].kind != "VariableDeclaration":
                targets = [c for c in node.children if c.kind == "VariableDeclaration"]
                expr = node.children[-1]
            else:
                continue
            for target in targets:
                for part in expr.walk():
                    self.edge(target, part, DATA_FLOW, "compute_from")

        scope_params = {d.text: d for d in params.children + returns.children if d.text}
        locals_: dict[str, PrunedNode] = {}

        def visit(node: PrunedNode) -> None:
            if node.kind == "VariableDeclarationStatement":
                decls = [c for c in node.children if c.kind == "VariableDeclaration"]
                for c in node.children:
                    if c.kind != "VariableDeclaration":
                        visit(c)
                for d in decls:
                    visit(d)
                    if d.text:
                        locals_[d.text] = d
                return
            if node.kind == "Identifier" and node.text:
                name = node.text
                if name in locals_:
                    self.edge(node, locals_[name], DATA_FLOW, "value_from")
                elif name in scope_params:
                    self.edge(node, scope_params[name], DATA_FLOW, "value_from")
                elif name in self.state_vars:
                    self.edge(node, self._state_node(name), DATA_FLOW, "value_from")
            for c in node.children:
                visit(c)

        visit(self.tree)

    def _state_node(self, name: str) -> int:
        if name not in self.state_index:
            decl = self.state_vars[name]
            nid = self.add_node(name, decl.ast_id)
            self.state_index[name] = nid
            self.edge(0, nid, DATA_TYPE, data_type_subtype(decl.type_text or ""))
        return self.state_index[name]

    # (f) fallback mechanism
    def add_fallback_edges(self) -> None:
        for node in self.tree.walk():
            if is_fallback_trigger(node):
                self.edge(node, 0, FALLBACK, "fallback")

    # (g) self loops
    def add_self_loops(self) -> None:
        for i in range(len(self.labels)):
            self.edge(i, i, SELF_LOOP, "self")

    def build(self) -> Mrfg:
        params, returns = self.tree.children[0], self.tree.children[1]
        body = self.tree.children[2:]
        self.materialize()
        self.add_sequential_edges(params, returns, body)
        self.add_structural_edges()
        self.add_dataflow_edges(params, returns)
        self.add_fallback_edges()
        self.add_self_loops()
        return Mrfg(
            name=self.fn.name,
            arity=self.fn.arity,
            nodes=list(enumerate(self.labels)),
            edges=sorted(self.edges, key=_edge_order),
            ast_ids=self.ast_ids,
            contract=self.fn.contract,
        )


def _edge_order(e: Edge):
    return (e.src, e.dst, e.category, e.subtype, -1 if e.seq is None else e.seq)


def contract_of(ast: NormalizedAst, fn: FunctionAst) -> Optional[AstNode]:
    parents = ast.parents()
    pid = parents.get(fn.root)
    return ast[pid] if pid is not None else None


def state_variables(ast: NormalizedAst, contract: Optional[AstNode]) -> dict[str, PrunedNode]:
    out: dict[str, PrunedNode] = {}
    if contract is None:
        return out
    for cid in contract.children:
        node = ast[cid]
        if node.kind == "VariableDeclaration" and node.text:
            out[node.text] = prune_subtree(ast, cid)[0]
    return out


def build_mrfg(fn: FunctionAst, ast: NormalizedAst) -> Mrfg:
    """Build the multi-relational function graph of ``fn``."""
    tree = prune_ast(fn, ast)
    state = state_variables(ast, contract_of(ast, fn))
    g = _GraphBuilder(fn, tree, state).build()
    g.span = ast[fn.root].span
    return g
