"""Solidity source to normalized syntax tree."""

from .ast import AST_FORMAT, NODE_KINDS, AstNode, FunctionAst, NormalizedAst, ingest_ast_json
from .parser import list_functions, parse_source

__all__ = [
    "AST_FORMAT",
    "NODE_KINDS",
    "AstNode",
    "FunctionAst",
    "NormalizedAst",
    "ingest_ast_json",
    "list_functions",
    "parse_source",
]
