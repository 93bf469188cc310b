"""Recursive-descent parser for a Solidity subset (0.4.x-0.5.x style, plus a few
0.6+ forms such as ``call{value: ...}`` and ``fallback()``).

Constructs outside the subset become ``Unsupported`` leaves instead of errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from ..errors import EncodingError, SourceSyntaxError
from .ast import (
    CONSTRUCTOR_MARK,
    FALLBACK_MARK,
    RECEIVE_MARK,
    AstNode,
    FunctionAst,
    NormalizedAst,
    renumber_preorder,
)
from .lexer import Token, tokenize

_ELEMENTARY_RE = re.compile(
    r"^(?:address|bool|string|bytes|byte|var|"
    r"u?int(?:8|16|24|32|40|48|56|64|72|80|88|96|104|112|120|128|136|144|152|160|168|176|184|192|200|208|216|224|232|240|248|256)?|"
    r"bytes(?:[1-9]|[12][0-9]|3[0-2])|"
    r"u?fixed(?:[0-9]+x[0-9]+)?)$"
)

_ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "|=", "&=", "^=", "<<=", ">>=", ">>>="}
_BINARY_PREC = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    ">": 4,
    "<=": 4,
    ">=": 4,
    "|": 5,
    "^": 6,
    "&": 7,
    "<<": 8,
    ">>": 8,
    ">>>": 8,
    "+": 9,
    "-": 9,
    "*": 10,
    "/": 10,
    "%": 10,
    "**": 11,
}
_PREFIX_OPS = {"!", "~", "-", "+", "++", "--", "delete"}
_UNITS = {"wei", "gwei", "szabo", "finney", "ether", "seconds", "minutes", "hours", "days", "weeks", "years"}
_LOCATIONS = {"memory", "storage", "calldata", "indexed"}
_STATE_VAR_FLAGS = {"public", "private", "internal", "external", "constant", "immutable", "override", "transient"}
_SKIPPED_MEMBERS = {"modifier", "event", "struct", "enum", "using", "error"}
_SKIPPED_TOPLEVEL = {"pragma", "import", "library", "interface", "struct", "enum", "error", "event", "using", "type", "function"}


def is_elementary(word: str) -> bool:
    return bool(_ELEMENTARY_RE.match(word))


@dataclass
class _Proto:
    kind: str
    text: Optional[str]
    children: list[int]
    span: tuple[int, int, int, int]


class _Parser:
    def __init__(self, tokens: list[Token], path: Optional[str]):
        self.toks = tokens
        self.i = 0
        self.path = path
        self.nodes: dict[int, _Proto] = {}

    # -- token helpers -------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, value: str) -> bool:
        t = self.tok
        return t.value == value and t.kind in ("op", "ident")

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, message: str, tok: Optional[Token] = None):
        t = tok or self.tok
        found = "end of input" if t.kind == "eof" else repr(t.value)
        raise SourceSyntaxError(f"{message}, found {found}", t.line, t.col, self.path)

    def expect(self, value: str) -> Token:
        if not self.at(value):
            self.error(f"expected {value!r}")
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            self.error("expected identifier")
        return self.advance()

    def node(self, kind: str, text: Optional[str], children: list[int], first: Token, last: Optional[Token] = None) -> int:
        last = last or self.toks[self.i - 1]
        nid = len(self.nodes)
        self.nodes[nid] = _Proto(kind, text, children, (first.line, first.col, last.end_line, last.end_col))
        return nid

    def first_token(self, nid: int) -> Token:
        line, col, _, _ = self.nodes[nid].span
        return Token("op", "", line, col, line, col)

    def skip_balanced(self, open_: str, close: str) -> Token:
        start = self.expect(open_)
        depth = 1
        while depth:
            t = self.advance()
            if t.kind == "eof":
                self.error(f"unclosed {open_!r}", start)
            if t.kind == "op" and t.value == open_:
                depth += 1
            elif t.kind == "op" and t.value == close:
                depth -= 1
        return self.toks[self.i - 1]

    def skip_unsupported(self, label: str) -> int:
        """Consume a construct up to ``;`` or a balanced ``{...}`` at depth 0."""
        first = self.tok
        depth = 0
        while True:
            t = self.tok
            if t.kind == "eof":
                self.error(f"unterminated {label}", first)
            if t.kind == "op":
                if t.value in "([":
                    depth += 1
                elif t.value in ")]":
                    depth -= 1
                elif t.value == ";" and depth == 0:
                    self.advance()
                    break
                elif t.value == "{" and depth == 0:
                    self.skip_balanced("{", "}")
                    break
            self.advance()
        return self.node("Unsupported", label, [], first)

    # -- top level -----------------------------------------------------

    def parse_source_unit(self) -> int:
        first = self.tok
        children = []
        while self.tok.kind != "eof":
            if self.at(";"):
                self.advance()
            elif self.at("contract") or (self.at("abstract") and self.peek().value == "contract"):
                children.append(self.parse_contract())
            elif self.tok.kind == "ident" and self.tok.value in _SKIPPED_TOPLEVEL:
                children.append(self.skip_unsupported(self.tok.value))
            elif self.tok.kind == "ident" and (is_elementary(self.tok.value) or self.peek().value == "constant"):
                children.append(self.skip_unsupported("constant"))
            else:
                self.error("expected contract definition")
        return self.node("SourceUnit", None, children, first, self.tok)

    def parse_contract(self) -> int:
        first = self.tok
        if self.at("abstract"):
            self.advance()
        self.expect("contract")
        name = self.expect_ident().value
        if self.at("is"):
            # inheritance specifiers are recorded nowhere: linearization is out of scope
            self.advance()
            while not self.at("{"):
                if self.tok.kind == "eof":
                    self.error("expected '{'")
                if self.at("("):
                    self.skip_balanced("(", ")")
                else:
                    self.advance()
        self.expect("{")
        members = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("expected '}'")
            members.append(self.parse_member(name))
        self.expect("}")
        return self.node("ContractDefinition", name, members, first)

    def parse_member(self, contract: str) -> int:
        t = self.tok
        if t.kind == "ident":
            if t.value == "function":
                return self.parse_function()
            if t.value == "constructor" and self.peek().value == "(":
                return self.parse_function()
            if t.value in ("fallback", "receive") and self.peek().value == "(":
                return self.parse_function()
            if t.value in _SKIPPED_MEMBERS:
                return self.skip_unsupported(t.value)
        if self.at(";"):
            tok = self.advance()
            return self.node("Unsupported", ";", [], tok)
        return self.parse_state_variable()

    def parse_state_variable(self) -> int:
        first = self.tok
        type_id = self.parse_type()
        while self.tok.kind == "ident" and self.tok.value in _STATE_VAR_FLAGS:
            self.advance()
            if self.at("("):
                self.skip_balanced("(", ")")
        name = self.expect_ident().value
        children = [type_id]
        if self.at("="):
            self.advance()
            children.append(self.parse_expression())
        self.expect(";")
        return self.node("VariableDeclaration", name, children, first)

    def parse_function(self) -> int:
        first = self.advance()
        if first.value == "constructor":
            text = CONSTRUCTOR_MARK
        elif first.value == "fallback":
            text = FALLBACK_MARK
        elif first.value == "receive":
            text = RECEIVE_MARK
        elif self.tok.kind == "ident":
            text = self.advance().value
        else:
            text = FALLBACK_MARK
        params = self.parse_parameter_list("Parameters")
        returns = None
        while not (self.at("{") or self.at(";")):
            if self.tok.kind == "eof":
                self.error("expected function body")
            if self.at("returns"):
                self.advance()
                returns = self.parse_parameter_list("ReturnParameters")
            elif self.tok.kind == "ident":
                # visibility, mutability, virtual/override, modifier invocations
                self.advance()
                if self.at("("):
                    self.skip_balanced("(", ")")
            else:
                self.error("unexpected token in function header")
        if returns is None:
            here = self.tok
            returns = self.node("ReturnParameters", None, [], here, here)
        children = [params, returns]
        if self.at("{"):
            children.append(self.parse_block())
        else:
            self.advance()
        return self.node("FunctionDefinition", text, children, first)

    def parse_parameter_list(self, kind: str) -> int:
        first = self.expect("(")
        decls = []
        while not self.at(")"):
            decl_first = self.tok
            type_id = self.parse_type()
            while self.tok.kind == "ident" and self.tok.value in _LOCATIONS:
                self.advance()
            name = None
            if self.tok.kind == "ident":
                name = self.advance().value
            decls.append(self.node("VariableDeclaration", name, [type_id], decl_first))
            if not self.at(")"):
                self.expect(",")
        self.expect(")")
        return self.node(kind, None, decls, first)

    # -- types ---------------------------------------------------------

    def parse_type(self) -> int:
        first = self.tok
        if self.at("mapping"):
            self.advance()
            self.expect("(")
            key = self.parse_type()
            if self.tok.kind == "ident" and self.peek().value == "=>":
                self.advance()  # named mapping key (0.8.18+)
            self.expect("=>")
            value = self.parse_type()
            if self.tok.kind == "ident" and self.peek().value == ")":
                self.advance()
            self.expect(")")
            tid = self.node("TypeName", "mapping", [key, value], first)
        elif self.at("function"):
            self.advance()
            self.skip_balanced("(", ")")
            while self.tok.kind == "ident" and self.tok.value in ("internal", "external", "pure", "view", "payable"):
                self.advance()
            if self.at("returns"):
                self.advance()
                self.skip_balanced("(", ")")
            tid = self.node("TypeName", "function", [], first)
        elif self.tok.kind == "ident" and is_elementary(self.tok.value):
            word = self.advance().value
            if word == "address" and self.at("payable"):
                self.advance()
            tid = self.node("ElementaryTypeName", word, [], first)
        elif self.tok.kind == "ident":
            parts = [self.advance().value]
            while self.at(".") and self.peek().kind == "ident":
                self.advance()
                parts.append(self.advance().value)
            tid = self.node("TypeName", ".".join(parts), [], first)
        else:
            self.error("expected type name")
        while self.at("["):
            self.advance()
            children = [tid]
            if not self.at("]"):
                children.append(self.parse_expression())
            self.expect("]")
            tid = self.node("TypeName", "array", children, first)
        return tid

    # -- statements ----------------------------------------------------

    def parse_block(self) -> int:
        first = self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("expected '}'", first)
            stmts.append(self.parse_statement())
        self.expect("}")
        return self.node("Block", None, stmts, first)

    def parse_statement(self) -> int:
        t = self.tok
        v = t.value if t.kind in ("ident", "op") else None
        if v == "{":
            return self.parse_block()
        if t.kind == "ident":
            if v == "if":
                self.advance()
                self.expect("(")
                cond = self.parse_expression()
                self.expect(")")
                children = [cond, self.parse_statement()]
                if self.at("else"):
                    self.advance()
                    children.append(self.parse_statement())
                return self.node("IfStatement", None, children, t)
            if v == "while":
                self.advance()
                self.expect("(")
                cond = self.parse_expression()
                self.expect(")")
                return self.node("WhileStatement", None, [cond, self.parse_statement()], t)
            if v == "do":
                self.advance()
                body = self.parse_statement()
                self.expect("while")
                self.expect("(")
                cond = self.parse_expression()
                self.expect(")")
                self.expect(";")
                return self.node("WhileStatement", "do", [cond, body], t)
            if v == "for":
                return self.parse_for()
            if v == "return":
                self.advance()
                children = [] if self.at(";") else [self.parse_expression()]
                self.expect(";")
                return self.node("Return", None, children, t)
            if v == "emit":
                self.advance()
                call = self.parse_expression()
                self.expect(";")
                return self.node("EmitStatement", None, [call], t)
            if v in ("throw", "break", "continue") and self.peek().value == ";":
                self.advance()
                self.advance()
                return self.node(v.capitalize(), None, [], t)
            if v == "assembly":
                self.advance()
                if self.tok.kind == "string":
                    self.advance()
                if self.at("("):
                    self.skip_balanced("(", ")")
                self.skip_balanced("{", "}")
                return self.node("Unsupported", "assembly", [], t)
            if v == "unchecked" and self.peek().value == "{":
                self.advance()
                block = self.parse_block()
                self.nodes[block].text = "unchecked"
                return block
            if v == "try":
                return self.skip_try()
            if v == "_" and self.peek().value == ";":
                self.advance()
                self.advance()
                return self.node("Unsupported", "_", [], t)
        if self.looks_like_declaration():
            stmt = self.parse_declaration_statement()
            self.expect(";")
            return stmt
        expr = self.parse_expression()
        self.expect(";")
        p = self.nodes[expr]
        if p.kind == "FunctionCall":
            callee = self.nodes[p.children[0]]
            if callee.kind == "Identifier" and callee.text == "require":
                return self.node("Require", None, p.children[1:], t)
        return self.node("ExpressionStatement", None, [expr], t)

    def skip_try(self) -> int:
        first = self.advance()
        while not self.at("{"):
            if self.tok.kind == "eof":
                self.error("unterminated try statement", first)
            self.advance()
        self.skip_balanced("{", "}")
        while self.at("catch"):
            while not self.at("{"):
                if self.tok.kind == "eof":
                    self.error("unterminated catch clause", first)
                self.advance()
            self.skip_balanced("{", "}")
        return self.node("Unsupported", "try", [], first)

    def parse_for(self) -> int:
        first = self.advance()
        self.expect("(")
        flags = ""
        children = []
        if self.at(";"):
            self.advance()
        else:
            if self.looks_like_declaration():
                children.append(self.parse_declaration_statement())
            else:
                st = self.tok
                children.append(self.node("ExpressionStatement", None, [self.parse_expression()], st))
            self.expect(";")
            flags += "i"
        if not self.at(";"):
            children.append(self.parse_expression())
            flags += "c"
        self.expect(";")
        if not self.at(")"):
            children.append(self.parse_expression())
            flags += "u"
        self.expect(")")
        children.append(self.parse_statement())
        return self.node("ForStatement", flags, children, first)

    def looks_like_declaration(self) -> bool:
        t = self.tok
        if t.kind == "op" and t.value == "(":
            return self._tuple_declaration_ahead()
        if t.kind != "ident":
            return False
        nxt = self.peek()
        if t.value in ("mapping",) and nxt.value == "(":
            return True
        if t.value == "var":
            return True
        if is_elementary(t.value):
            return not (nxt.kind == "op" and nxt.value in ("(", "."))
        # user-defined type: Ident(.Ident)* ([...])* followed by an identifier
        j = self.i + 1
        while self.toks[j].value == "." and self.toks[j + 1].kind == "ident":
            j += 2
        while self.toks[j].kind == "op" and self.toks[j].value == "[":
            depth = 0
            while True:
                tok = self.toks[j]
                if tok.kind == "eof":
                    return False
                if tok.kind == "op" and tok.value == "[":
                    depth += 1
                elif tok.kind == "op" and tok.value == "]":
                    depth -= 1
                    if depth == 0:
                        j += 1
                        break
                j += 1
        return self.toks[j].kind == "ident"

    def _tuple_declaration_ahead(self) -> bool:
        j = self.i + 1
        while self.toks[j].kind == "op" and self.toks[j].value == ",":
            j += 1
        a, b = self.toks[j], self.toks[j + 1]
        return a.kind == "ident" and (is_elementary(a.value) or b.kind == "ident")

    def parse_declaration_statement(self) -> int:
        first = self.tok
        decls = []
        if self.at("("):
            self.advance()
            while not self.at(")"):
                if self.at(","):
                    self.advance()
                    continue
                decls.append(self._local_declaration())
                if not self.at(")"):
                    self.expect(",")
            self.expect(")")
        elif self.at("var") and self.peek().value == "(":
            self.advance()
            self.advance()
            while not self.at(")"):
                if self.at(","):
                    self.advance()
                    continue
                name_tok = self.expect_ident()
                ty = self.node("ElementaryTypeName", "var", [], name_tok, name_tok)
                decls.append(self.node("VariableDeclaration", name_tok.value, [ty], name_tok))
            self.expect(")")
        else:
            decls.append(self._local_declaration())
        children = decls
        if self.at("="):
            self.advance()
            children = decls + [self.parse_expression()]
        return self.node("VariableDeclarationStatement", None, children, first)

    def _local_declaration(self) -> int:
        first = self.tok
        type_id = self.parse_type()
        while self.tok.kind == "ident" and self.tok.value in _LOCATIONS:
            self.advance()
        name = self.expect_ident().value
        return self.node("VariableDeclaration", name, [type_id], first)

    # -- expressions ---------------------------------------------------

    def parse_expression(self) -> int:
        lhs = self.parse_conditional()
        if self.tok.kind == "op" and self.tok.value in _ASSIGN_OPS:
            op = self.advance().value
            rhs = self.parse_expression()
            return self.node("Assignment", op, [lhs, rhs], self.first_token(lhs))
        return lhs

    def parse_conditional(self) -> int:
        cond = self.parse_binary(1)
        if self.at("?"):
            self.advance()
            yes = self.parse_expression()
            self.expect(":")
            no = self.parse_expression()
            return self.node("Conditional", None, [cond, yes, no], self.first_token(cond))
        return cond

    def parse_binary(self, min_prec: int) -> int:
        lhs = self.parse_unary()
        while True:
            t = self.tok
            prec = _BINARY_PREC.get(t.value) if t.kind == "op" else None
            if prec is None or prec < min_prec:
                return lhs
            self.advance()
            # ** is right-associative
            rhs = self.parse_binary(prec if t.value == "**" else prec + 1)
            lhs = self.node("BinaryOperation", t.value, [lhs, rhs], self.first_token(lhs))

    def parse_unary(self) -> int:
        t = self.tok
        if (t.kind == "op" and t.value in _PREFIX_OPS) or (t.kind == "ident" and t.value == "delete"):
            self.advance()
            operand = self.parse_unary()
            return self.node("UnaryOperation", t.value, [operand], t)
        if t.kind == "ident" and t.value == "new":
            self.advance()
            type_id = self.parse_type()
            return self.parse_postfix(self.node("NewExpression", None, [type_id], t))
        return self.parse_postfix()

    def parse_postfix(self, expr: Optional[int] = None) -> int:
        if expr is None:
            expr = self.parse_primary()
        first = self.first_token(expr)
        while True:
            t = self.tok
            if t.kind != "op":
                return expr
            if t.value == "(":
                self.advance()
                args = self.parse_call_arguments()
                expr = self.node("FunctionCall", None, [expr] + args, first)
            elif t.value == "." and self.peek().kind == "ident":
                self.advance()
                member = self.advance().value
                expr = self.node("MemberAccess", member, [expr], first)
            elif t.value == "[":
                self.advance()
                children = [expr]
                if not self.at("]"):
                    children.append(self.parse_expression())
                if self.at(":"):
                    # slice a[i:j]; the upper bound is kept as a second index
                    self.advance()
                    if not self.at("]"):
                        children.append(self.parse_expression())
                self.expect("]")
                expr = self.node("IndexAccess", None, children, first)
            elif t.value == "{" and self.peek().kind == "ident" and self.peek(2).value == ":":
                self.advance()
                names, values = [], []
                while not self.at("}"):
                    names.append(self.expect_ident().value)
                    self.expect(":")
                    values.append(self.parse_expression())
                    if not self.at("}"):
                        self.expect(",")
                self.expect("}")
                expr = self.node("FunctionCallOptions", ",".join(names), [expr] + values, first)
            elif t.value in ("++", "--"):
                self.advance()
                expr = self.node("UnaryOperation", t.value, [expr], first)
            else:
                return expr

    def parse_call_arguments(self) -> list[int]:
        args = []
        if self.at("{"):
            # named arguments: f({a: 1, b: 2}); names are dropped
            self.advance()
            while not self.at("}"):
                self.expect_ident()
                self.expect(":")
                args.append(self.parse_expression())
                if not self.at("}"):
                    self.expect(",")
            self.expect("}")
            self.expect(")")
            return args
        while not self.at(")"):
            args.append(self.parse_expression())
            if not self.at(")"):
                self.expect(",")
        self.expect(")")
        return args

    def parse_primary(self) -> int:
        t = self.tok
        if t.kind == "number":
            self.advance()
            text = t.value
            if self.tok.kind == "ident" and self.tok.value in _UNITS:
                text += " " + self.advance().value
            return self.node("Literal", text, [], t)
        if t.kind in ("string", "hexstring"):
            self.advance()
            text = t.value
            while self.tok.kind == t.kind:  # adjacent literals concatenate
                text += " " + self.advance().value
            return self.node("Literal", text, [], t)
        if t.kind == "ident":
            self.advance()
            if t.value in ("true", "false"):
                return self.node("Literal", t.value, [], t)
            if t.value == "address" and self.at("payable"):
                self.advance()
            return self.node("Identifier", t.value, [], t)
        if t.kind == "op" and t.value in ("(", "["):
            close = ")" if t.value == "(" else "]"
            self.advance()
            elements: list[Optional[int]] = []
            trailing_comma = False
            while not self.at(close):
                if self.at(","):
                    self.advance()
                    elements.append(None)
                    trailing_comma = True
                    continue
                elements.append(self.parse_expression())
                trailing_comma = False
                if not self.at(close):
                    self.expect(",")
                    trailing_comma = True
            self.expect(close)
            present = [e for e in elements if e is not None]
            if t.value == "(" and len(elements) == 1 and not trailing_comma and present:
                return present[0]
            return self.node("TupleExpression", "[]" if t.value == "[" else None, present, t)
        self.error("expected expression")


def decode_source(content: bytes | str, path: Optional[str] = None) -> str:
    if isinstance(content, str):
        return content
    try:
        return content.decode("utf-8")
    except UnicodeDecodeError as exc:
        where = f"{path}: " if path else ""
        raise EncodingError(f"{where}invalid UTF-8 at byte {exc.start}") from exc


def parse_source(content: bytes | str, path: str = "") -> NormalizedAst:
    """Parse Solidity source into a :class:`NormalizedAst`.

    Raises :class:`SourceSyntaxError` on malformed input and
    :class:`EncodingError` when ``content`` is not UTF-8.
    """
    text = decode_source(content, path or None)
    if text.startswith("﻿"):
        text = text[1:]
    parser = _Parser(tokenize(text, path or None), path or None)
    root = parser.parse_source_unit()
    nodes = {
        nid: AstNode(nid, p.kind, p.text, tuple(p.children), p.span) for nid, p in parser.nodes.items()
    }
    return renumber_preorder(nodes, root, path)


def list_functions(ast: NormalizedAst) -> list[FunctionAst]:
    """One entry per FunctionDefinition, in file order, across all contracts."""
    out = []
    for contract in ast.walk():
        if contract.kind != "ContractDefinition":
            continue
        for cid in contract.children:
            fn = ast[cid]
            if fn.kind != "FunctionDefinition":
                continue
            params = ast[fn.children[0]]
            is_fallback = fn.text in (FALLBACK_MARK, RECEIVE_MARK)
            is_ctor = fn.text == CONSTRUCTOR_MARK or fn.text == contract.text
            name = "" if fn.text in (FALLBACK_MARK, RECEIVE_MARK, CONSTRUCTOR_MARK) else fn.text
            out.append(FunctionAst(name, len(params.children), fn.id, is_fallback, is_ctor, contract.text))
    return out
