"""Recursive-descent parser for LTL_f formulas.

Grammar (lowest precedence first)::

    formula := or ( "->" formula )?          # right associative
    or      := and ( "|" and )*
    and     := binary ( "&" binary )*
    binary  := unary ( ( "U" | "R" ) binary )?  # right associative
    unary   := ( "!" | "X" | "F" | "G" ) unary | atom
    atom    := "true" | "false" | IDENT | "(" formula ")"

``IDENT`` is ``[A-Za-z_][A-Za-z0-9_]*`` excluding the keywords ``X F G U R
true false``.  ``a -> b`` is sugar for ``!a | b``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from . import formula as fm

KEYWORDS = {"X", "F", "G", "U", "R", "true", "false"}

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<arrow>->)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[!&|()])"
)


class LtlfSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise _error(text, pos, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "ident" and value in KEYWORDS:
                kind = value
            elif kind in ("op", "arrow"):
                kind = value
            toks.append(_Tok(kind, value, pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


def _error(text: str, pos: int, message: str) -> LtlfSyntaxError:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return LtlfSyntaxError(message, line, col)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self, kind: str) -> _Tok:
        tok = self.tok
        if tok.kind != kind:
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise _error(self.text, tok.pos, f"expected {kind!r}, found {found}")
        self.i += 1
        return tok

    def formula(self) -> fm.Formula:
        left = self.disjunction()
        if self.tok.kind == "->":
            self.i += 1
            return fm.implies(left, self.formula())
        return left

    def disjunction(self) -> fm.Formula:
        f = self.conjunction()
        while self.tok.kind == "|":
            self.i += 1
            f = fm.Or((f, self.conjunction()))
        return f

    def conjunction(self) -> fm.Formula:
        f = self.binary()
        while self.tok.kind == "&":
            self.i += 1
            f = fm.And((f, self.binary()))
        return f

    def binary(self) -> fm.Formula:
        left = self.unary()
        if self.tok.kind in ("U", "R"):
            op = fm.Until if self.take(self.tok.kind).kind == "U" else fm.Release
            return op(left, self.binary())
        return left

    def unary(self) -> fm.Formula:
        kind = self.tok.kind
        if kind == "!":
            self.i += 1
            return fm.Not(self.unary())
        if kind in ("X", "F", "G"):
            self.i += 1
            op = {"X": fm.Next, "F": fm.Eventually, "G": fm.Always}[kind]
            return op(self.unary())
        return self.atom()

    def atom(self) -> fm.Formula:
        tok = self.tok
        if tok.kind == "true":
            self.i += 1
            return fm.TRUE
        if tok.kind == "false":
            self.i += 1
            return fm.FALSE
        if tok.kind == "ident":
            self.i += 1
            return fm.Prop(tok.text)
        if tok.kind == "(":
            self.i += 1
            f = self.formula()
            self.take(")")
            return f
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise _error(self.text, tok.pos, f"expected a formula, found {found}")


def parse(text: str, ap: Sequence[str] | None = None) -> fm.Formula:
    """Parse ``text``; if ``ap`` is given every proposition must belong to it."""
    p = _Parser(text)
    f = p.formula()
    p.take("eof")
    if ap is not None:
        fm.check_props(f, list(ap))
    return f
