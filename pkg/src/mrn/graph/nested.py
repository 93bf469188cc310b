"""Contract-level graph: function nodes joined by invocation edges."""

from __future__ import annotations

from typing import Optional

from ..frontend.ast import AstNode, FunctionAst, NormalizedAst
from ..frontend.parser import list_functions
from .builder import build_mrfg, type_string
from .types import Mrng


def _contract_functions(ast: NormalizedAst, functions: list[FunctionAst]) -> dict[str, list[int]]:
    by_contract: dict[str, list[int]] = {}
    for i, fn in enumerate(functions):
        by_contract.setdefault(fn.contract, []).append(i)
    return by_contract


def _declared_types(ast: NormalizedAst, contract: AstNode, fn_root: int) -> dict[str, str]:
    """Variable name -> declared type text, for state variables then the function's own."""
    types: dict[str, str] = {}
    scopes = [ast[c] for c in contract.children if ast[c].kind == "VariableDeclaration"]
    scopes += [n for n in ast.walk(fn_root) if n.kind == "VariableDeclaration"]
    for decl in scopes:
        if decl.text and decl.children and ast[decl.children[0]].kind in ("TypeName", "ElementaryTypeName"):
            types[decl.text] = type_string(ast, ast[decl.children[0]])
    return types


def _pick(candidates: list[int], functions: list[FunctionAst], name: str, arity: int) -> Optional[int]:
    same_name = [i for i in candidates if functions[i].name == name]
    matching = [i for i in same_name if functions[i].arity == arity]
    if matching:
        return matching[0]
    if len(same_name) == 1:
        return same_name[0]
    return None


def call_index_pairs(ast: NormalizedAst, functions: Optional[list[FunctionAst]] = None) -> list[tuple[int, int]]:
    """Invocation edges as (caller index, callee index) into ``list_functions(ast)``."""
    functions = list_functions(ast) if functions is None else functions
    by_contract = _contract_functions(ast, functions)
    contracts = {n.text: n for n in ast.walk() if n.kind == "ContractDefinition"}
    parents = ast.parents()
    everything = list(range(len(functions)))
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()

    for caller, fn in enumerate(functions):
        contract = ast[parents[fn.root]]
        local = by_contract.get(fn.contract, [])
        var_types = _declared_types(ast, contract, fn.root)
        for node in ast.walk(fn.root):
            if node.kind != "FunctionCall":
                continue
            callee_node = ast[node.children[0]]
            arity = len(node.children) - 1
            target: Optional[int] = None
            if callee_node.kind == "Identifier":
                name = callee_node.text or ""
                if name in contracts:
                    continue  # type conversion, not an invocation
                pool = local if any(functions[i].name == name for i in local) else everything
                target = _pick(pool, functions, name, arity)
            elif callee_node.kind == "MemberAccess":
                target_contract = _member_base_contract(ast, ast[callee_node.children[0]], fn, contracts, var_types)
                if target_contract is not None:
                    target = _pick(by_contract.get(target_contract, []), functions, callee_node.text or "", arity)
            if target is not None and (caller, target) not in seen:
                seen.add((caller, target))
                pairs.append((caller, target))
    return pairs


def _member_base_contract(ast, base: AstNode, fn: FunctionAst, contracts, var_types) -> Optional[str]:
    if base.kind == "Identifier":
        if base.text == "this":
            return fn.contract
        if base.text in contracts:
            return base.text
        declared = var_types.get(base.text or "")
        if declared in contracts:
            return declared
        return None
    if base.kind == "FunctionCall":
        # explicit conversion Victim(addr).withdraw()
        callee = ast[base.children[0]]
        if callee.kind == "Identifier" and callee.text in contracts and len(base.children) == 2:
            return callee.text
    return None


def extract_call_edges(ast: NormalizedAst) -> list[tuple[tuple[str, int], tuple[str, int]]]:
    """Invocation edges as ((caller name, arity), (callee name, arity))."""
    functions = list_functions(ast)
    return [
        ((functions[a].name, functions[a].arity), (functions[b].name, functions[b].arity))
        for a, b in call_index_pairs(ast, functions)
    ]


def build_mrng(ast: NormalizedAst, contract: Optional[str] = None) -> Mrng:
    functions = list_functions(ast)
    graphs = [build_mrfg(fn, ast) for fn in functions]
    return Mrng(contract if contract is not None else ast.path, graphs, call_index_pairs(ast, functions))
