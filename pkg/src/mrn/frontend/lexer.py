"""Tokenizer for the supported Solidity subset."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import SourceSyntaxError


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | string | hexstring | op | eof
    value: str
    line: int
    col: int
    end_line: int
    end_col: int


_PUNCT = sorted(
    """
    >>>= <<= >>= **= ... => == != <= >= && || ++ -- += -= *= /= %= |= &= ^= << >> ** ->
    + - * / % ! ~ < > = & | ^ ? : ; , . ( ) [ ] { }
    """.split(),
    key=len,
    reverse=True,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<hexstring>hex(?:"[0-9a-fA-F_]*"|'[0-9a-fA-F_]*'))
  | (?P<string>(?:unicode)?"(?:[^"\\\n]|\\.)*"|(?:unicode)?'(?:[^'\\\n]|\\.)*')
  | (?P<number>0[xX][0-9a-fA-F_]+|(?:[0-9][0-9_]*(?:\.[0-9_]*)?|\.[0-9][0-9_]*)(?:[eE]-?[0-9_]+)?)
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<op>"""
    + "|".join(re.escape(p) for p in _PUNCT)
    + r""")
    """,
    re.VERBOSE | re.DOTALL,
)


def tokenize(text: str, path: str | None = None) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            if text.startswith("/*", pos):
                raise SourceSyntaxError("unterminated block comment", line, col, path)
            if text[pos] in "\"'":
                raise SourceSyntaxError("unterminated string literal", line, col, path)
            raise SourceSyntaxError(f"unexpected character {text[pos]!r}", line, col, path)
        kind = m.lastgroup
        value = m.group()
        start_line, start_col = line, pos - line_start + 1
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        end_pos = m.end()
        if kind not in ("ws", "line_comment", "block_comment"):
            tokens.append(Token(kind, value, start_line, start_col, line, end_pos - line_start + 1))
        pos = end_pos
    tokens.append(Token("eof", "", line, pos - line_start + 1, line, pos - line_start + 1))
    return tokens
