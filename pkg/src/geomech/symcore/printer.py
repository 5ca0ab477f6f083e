"""Canonical text form.  The output is valid input for :func:`parse`."""
from __future__ import annotations

from fractions import Fraction


def _fmt_exp(e) -> str:
    e = Fraction(e)
    if e.denominator == 1:
        return f"^{e.numerator}" if e >= 0 else f"^({e.numerator})"
    return f"^({e.numerator}/{e.denominator})"


def _factor(a, e) -> str:
    k = a.kind
    if k == "sym":
        base = a.name
    elif k == "func":
        base = f"{a.name}({to_string(a.arg)})"
    elif k == "sum":
        base = f"({to_string(a.base)})"
    else:
        v = Fraction(a.value)
        base = str(v) if v.denominator == 1 else f"({v})"
    return base if e == 1 else base + _fmt_exp(e)


def _term(m, c) -> tuple[bool, str]:
    c = Fraction(c)
    neg = c < 0
    p, q = abs(c.numerator), c.denominator
    num = [_factor(a, e) for a, e in m if e > 0]
    den = [_factor(a, -e) for a, e in m if e < 0]
    if not num:
        head = str(p)
        if q != 1:
            den.insert(0, str(q))
    else:
        head = "*".join(num)
        if q != 1:
            head = f"{p}/{q}*{head}"
        elif p != 1:
            head = f"{p}*{head}"
    if den:
        head += "/" + (den[0] if len(den) == 1 else "(" + "*".join(den) + ")")
    return neg, head


def to_string(x) -> str:
    terms = x.sorted_terms()
    if not terms:
        return "0"
    out = []
    for i, (m, c) in enumerate(terms):
        neg, s = _term(m, c)
        if i == 0:
            out.append("-" + s if neg else s)
        else:
            out.append((" - " if neg else " + ") + s)
    return "".join(out)
