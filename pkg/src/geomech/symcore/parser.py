"""Pratt parser for the infix expression grammar.

Precedence from loosest to tightest: ``+ -``, ``* /``, unary ``-``, ``^``.
``^`` is right-associative and its right operand must be a rational constant.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Optional

from .coords import CoordSystem
from .expr import FUNCTION_TABLE, Expr, apply_function, const, sym

_TOKEN = re.compile(r"((?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)|([a-zA-Z][a-zA-Z0-9_]*)|(.)")

_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_BP = 30


class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position
        self.text = text


class _Parser:
    def __init__(self, text: str, cs: Optional[CoordSystem]):
        self.text = text
        self.cs = cs
        self.tokens = self._lex(text)
        self.i = 0

    def _lex(self, text):
        toks = []
        pos = 0
        n = len(text)
        while True:
            while pos < n and text[pos].isspace():
                pos += 1
            if pos >= n:
                break
            m = _TOKEN.match(text, pos)
            num, ident, other = m.groups()
            if num is not None:
                toks.append(("num", num, pos))
            elif ident is not None:
                toks.append(("id", ident, pos))
            else:
                if other not in "+-*/^(),":
                    raise ParseError(f"unexpected character {other!r}", pos, text)
                toks.append(("op", other, pos))
            pos = m.end()
        toks.append(("end", "", n))
        return toks

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, pos = self.advance()
        if v != value or kind != "op":
            raise ParseError(f"expected {value!r}", pos, self.text)

    def parse(self) -> Expr:
        e = self.expr(0)
        kind, v, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {v!r}", pos, self.text)
        return e

    def expr(self, rbp: int) -> Expr:
        left = self.nud(self.advance())
        while True:
            kind, v, pos = self.peek()
            if kind != "op" or v not in _BP or _BP[v] <= rbp:
                return left
            self.advance()
            left = self.led(v, pos, left)

    def nud(self, tok) -> Expr:
        kind, v, pos = tok
        if kind == "num":
            return const(Fraction(v))
        if kind == "id":
            if v in FUNCTION_TABLE:
                nk, nv, npos = self.peek()
                if nv != "(":
                    raise ParseError(f"function {v!r} needs an argument", npos, self.text)
                self.advance()
                arg = self.expr(0)
                self.expect(")")
                try:
                    return apply_function(v, arg)
                except (ValueError, ZeroDivisionError) as exc:
                    raise ParseError(str(exc), pos, self.text) from None
            if self.cs is not None and not self.cs.has(v):
                raise ParseError(f"unknown symbol {v!r}", pos, self.text)
            return sym(v)
        if kind == "op" and v == "(":
            e = self.expr(0)
            self.expect(")")
            return e
        if kind == "op" and v == "-":
            return -self.expr(_UNARY_BP)
        if kind == "op" and v == "+":
            return self.expr(_UNARY_BP)
        if kind == "end":
            raise ParseError("unexpected end of input", pos, self.text)
        raise ParseError(f"unexpected token {v!r}", pos, self.text)

    def led(self, op: str, pos: int, left: Expr) -> Expr:
        if op == "^":
            right = self.expr(_BP["^"] - 1)
            if not right.is_constant:
                raise ParseError("exponent must be a rational constant", pos, self.text)
            try:
                return left ** right.as_rational()
            except (ValueError, ZeroDivisionError) as exc:
                raise ParseError(str(exc), pos, self.text) from None
        right = self.expr(_BP[op])
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        try:
            return left / right
        except ZeroDivisionError:
            raise ParseError("division by zero", pos, self.text) from None


def parse(text: str, cs: Optional[CoordSystem] = None) -> Expr:
    """Parse ``text`` into a canonical expression.

    With a coordinate system, identifiers must be declared in it (``pi`` is
    always available).
    """
    return _Parser(text, cs).parse()
