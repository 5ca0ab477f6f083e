"""Floating-point evaluation of canonical expressions."""
from __future__ import annotations

import math
from typing import Mapping

from .expr import Atom, Expr


class EvaluationError(ArithmeticError):
    """Unbound symbol or domain violation; ``subtree`` names the offending part."""

    def __init__(self, message: str, subtree: str = ""):
        super().__init__(message if not subtree else f"{message}: {subtree}")
        self.subtree = subtree


class UnboundSymbolError(EvaluationError, KeyError):
    pass


def _power(base: float, e, label) -> float:
    fe = float(e)
    if base == 0.0:
        if fe < 0:
            raise EvaluationError("division by zero", label())
        return 0.0
    if base < 0 and not (isinstance(e, int) or e.denominator == 1):
        den = e.denominator
        if den % 2 == 0:
            raise EvaluationError("even root of a negative value", label())
        r = abs(base) ** fe
        return -r if e.numerator % 2 else r
    try:
        return base ** fe if not (isinstance(e, int) or e.denominator == 1) else base ** int(e)
    except OverflowError:
        raise EvaluationError("overflow", label()) from None


def evaluate(x: Expr, point: Mapping[str, float]) -> float:
    """Evaluate ``x`` with symbols bound by ``point``; ``pi`` defaults to math.pi."""
    cache: dict = {}

    def atom(a: Atom) -> float:
        v = cache.get(a)
        if v is not None:
            return v
        k = a.kind
        if k == "sym":
            try:
                v = float(point[a.name])
            except KeyError:
                if a.name == "pi":
                    v = math.pi
                else:
                    raise UnboundSymbolError(f"unbound symbol {a.name!r}") from None
        elif k == "root":
            v = float(a.value)
        elif k == "sum":
            v = evaluate(a.base, point)
        else:
            arg = evaluate(a.arg, point)
            name = a.name
            if name == "exp":
                try:
                    v = math.exp(arg)
                except OverflowError:
                    raise EvaluationError("overflow", a.text()) from None
            elif name == "log":
                if arg <= 0:
                    raise EvaluationError("log of a non-positive value", a.text())
                v = math.log(arg)
            elif name == "sin":
                v = math.sin(arg)
            else:
                v = math.cos(arg)
        cache[a] = v
        return v

    total = 0.0
    for m, c in x._d.items():
        term = float(c)
        for a, e in m:
            base = atom(a)
            term *= base if e == 1 else _power(base, e, lambda a=a, e=e: f"{a.text()}^({e})")
        total += term
    if not math.isfinite(total):
        raise EvaluationError("non-finite value", str(x))
    return total
