from __future__ import annotations

import re
from dataclasses import dataclass

KEYWORDS = frozenset({"let", "in", "forall", "data", "where", "import"})

SYMBOLS = ("->", "=>", "..", "==", "=", ":", ";", ",", "(", ")", "[", "]", "{", "}",
           "\\", ".", "+", "*", "|")

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<lower>[a-z_][A-Za-z0-9_']*)
  | (?P<upper>[A-Z][A-Za-z0-9_']*)
  | (?P<sym>->|=>|\.\.|==|[=:;,()\[\]{}\\.+*|])
    """,
    re.VERBOSE,
)


class SyntaxError_(Exception):
    """Lexing or parsing failure at a source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # int | lower | upper | kw | sym | eof
    value: str
    line: int
    col: int
    bol: bool  # first token on its line and in column 1: starts a top-level item

    def is_(self, kind: str, value: str | None = None) -> bool:
        return self.kind == kind and (value is None or self.value == value)

    def __str__(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.value)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    fresh_line = True
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SyntaxError_(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        col = pos - line_start + 1
        pos = m.end()
        if kind == "nl":
            line, line_start, fresh_line = line + 1, pos, True
            continue
        if kind in ("ws", "comment"):
            continue
        if kind == "lower" and value in KEYWORDS:
            kind = "kw"
        elif kind == "lower" and value == "_":
            kind = "sym"
        tokens.append(Token(kind, value, line, col, fresh_line and col == 1))
        fresh_line = False
    tokens.append(Token("eof", "", line, pos - line_start + 1, True))
    return tokens
