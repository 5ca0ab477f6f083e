"""Canonical symbolic expressions.

An :class:`Expr` is a sum of monomials with exact rational coefficients.  A
monomial is a product of *atoms* raised to rational powers.  Atoms are

* named symbols,
* unary functions ``exp``, ``log``, ``sin``, ``cos`` of a canonical argument,
* sums raised to a non-integral or negative power, e.g. ``(q1^2 + q2^2)^(-3/2)``,
* irrational roots of positive rationals, e.g. ``2^(1/2)``.

Every arithmetic operation returns a canonical value, so structural equality
coincides with equality of canonical forms.  The normalization rules are:

* like terms are collected and zero terms dropped;
* a sum raised to an exponent ``e >= 1`` has ``floor(e)`` factors expanded;
* all ``exp`` factors of a monomial merge into one ``exp`` of the summed argument;
* ``sin(a)^n`` with ``n >= 2`` is rewritten through ``sin^2 = 1 - cos^2``;
* odd/even symmetry pulls the sign out of ``sin`` and ``cos`` arguments.

Symbols are assumed positive when combining radicals, so ``(x^2)^(1/2) = x``.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

Rational = Union[int, Fraction]
Number = Union[int, float, Fraction]

FUNCTIONS = ("exp", "log", "sin", "cos")


def as_rational(x: Number) -> Rational:
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, (int, Fraction)):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite constant {x!r}")
        # decimal reading: 0.1 means 1/10, not the nearest binary double
        return Fraction(repr(x))
    raise TypeError(f"cannot use {type(x).__name__} as a rational constant")


def _natural_key(name: str) -> str:
    return re.sub(r"\d+", lambda m: m.group().zfill(8), name)


def _fmt_rational(r: Rational) -> str:
    if isinstance(r, Fraction) and r.denominator != 1:
        return f"{r.numerator}/{r.denominator}"
    return str(int(r))


# ---------------------------------------------------------------- atoms

class Atom:
    """Base of a monomial factor.  Atoms are interned, so identity is equality."""

    __slots__ = ("key", "free", "__weakref__")
    kind = "atom"

    def __repr__(self) -> str:
        return f"<{self.kind} {self.text()}>"

    def text(self) -> str:
        raise NotImplementedError

    def __lt__(self, other: "Atom") -> bool:
        return self.key < other.key


class Symbol(Atom):
    __slots__ = ("name",)
    kind = "sym"

    def text(self) -> str:
        return self.name


class FuncAtom(Atom):
    __slots__ = ("name", "arg")
    kind = "func"

    def text(self) -> str:
        return f"{self.name}({self.arg})"


class SumAtom(Atom):
    """A multi-term sum that appears under a non-natural power."""

    __slots__ = ("base",)
    kind = "sum"

    def text(self) -> str:
        return f"({self.base})"


class RootAtom(Atom):
    """A positive rational base under a fractional power, e.g. ``2^(1/2)``."""

    __slots__ = ("value",)
    kind = "root"

    def text(self) -> str:
        return _fmt_rational(self.value)


_interned: dict = {}


def symbol_atom(name: str) -> Symbol:
    a = _interned.get(("s", name))
    if a is None:
        a = Symbol()
        a.name = name
        a.key = "1" + _natural_key(name)
        a.free = frozenset((name,))
        _interned[("s", name)] = a
    return a


def _func_atom(name: str, arg: "Expr") -> FuncAtom:
    k = ("f", name, arg)
    a = _interned.get(k)
    if a is None:
        a = FuncAtom()
        a.name = name
        a.arg = arg
        a.key = "2" + name + "(" + arg.key + ")"
        a.free = arg.free_symbols
        _interned[k] = a
    return a


def _sum_atom(base: "Expr") -> SumAtom:
    k = ("S", base)
    a = _interned.get(k)
    if a is None:
        a = SumAtom()
        a.base = base
        a.key = "3(" + base.key + ")"
        a.free = base.free_symbols
        _interned[k] = a
    return a


def _root_atom(value: Fraction) -> RootAtom:
    k = ("r", value)
    a = _interned.get(k)
    if a is None:
        a = RootAtom()
        a.value = value
        a.key = "0" + str(value)
        a.free = frozenset()
        _interned[k] = a
    return a


# ---------------------------------------------------------------- polynomial core
# A "poly" is a plain dict monomial -> coefficient; a monomial is a tuple of
# (atom, exponent) pairs sorted by atom key.

def _atom_key(pair):
    return pair[0].key


def _padd_into(acc: dict, d: dict, scale: Rational = 1) -> None:
    for m, c in d.items():
        v = acc.get(m, 0) + c * scale
        if v:
            acc[m] = v
        else:
            acc.pop(m, None)


def _pmul(d1: dict, d2: dict) -> dict:
    if len(d1) > len(d2):
        d1, d2 = d2, d1
    out: dict = {}
    for m1, c1 in d1.items():
        for m2, c2 in d2.items():
            c = c1 * c2
            for m, k in _mono_mul(m1, m2):
                v = out.get(m, 0) + c * k
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
    return out


@lru_cache(maxsize=200_000)
def _mono_mul(m1: tuple, m2: tuple) -> tuple:
    """Product of two monomials as a tuple of (monomial, coefficient) pairs."""
    if not m1 or not m2:
        # still normalized: a factor from _monomial_factor may carry a sum atom to power >= 1
        return tuple(_normalize(dict(m1 or m2)).items())
    d = dict(m1)
    for a, e in m2:
        d[a] = d.get(a, 0) + e
    return tuple(_normalize(d).items())


def _normalize(d: dict) -> dict:
    """Canonicalize a mapping atom -> exponent into a poly."""
    coeff: Rational = 1
    items = []
    expand: list = []
    exp_arg = None
    for a, e in d.items():
        if e == 0:
            continue
        kind = a.kind
        if kind == "func":
            name = a.name
            if name == "exp":
                t = a.arg if e == 1 else a.arg * e
                exp_arg = t if exp_arg is None else exp_arg + t
                continue
            if name == "sin" and e >= 2 and _is_int(e):
                k = int(e) // 2
                expand.append(_pow_nat(_ONE_MINUS_COS2(a.arg)._d, k))
                e = e - 2 * k
                if e == 0:
                    continue
        elif kind == "sum":
            if e >= 1:
                fl = math.floor(e)
                expand.append(_pow_nat(a.base._d, fl))
                e = e - fl
                if e == 0:
                    continue
        elif kind == "root":
            fl = math.floor(e)
            if fl:
                coeff = coeff * Fraction(a.value) ** fl
                e = e - fl
                if e == 0:
                    continue
        items.append((a, e))
    if exp_arg is not None and exp_arg._d:
        items.append((_func_atom("exp", exp_arg), 1))
    items.sort(key=_atom_key)
    out = {tuple(items): coeff}
    for p in expand:
        out = _pmul(out, p)
    return out


def _is_int(e) -> bool:
    return isinstance(e, int) or e.denominator == 1


def _pow_nat(d: dict, n: int) -> dict:
    result: dict = {(): 1}
    base = d
    while n:
        if n & 1:
            result = _pmul(result, base)
        n >>= 1
        if n:
            base = _pmul(base, base)
    return result


def _ONE_MINUS_COS2(arg: "Expr") -> "Expr":
    c = cos(arg)
    return ONE - c * c


def _rational_root(c: Fraction, e: Fraction):
    """Exact value of c**e for c > 0 when it is rational, else None."""
    num, den = e.numerator, e.denominator

    def iroot(n: int):
        r = round(n ** (1.0 / den))
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand ** den == n:
                return cand
        return None

    a, b = iroot(c.numerator), iroot(c.denominator)
    if a is None or b is None:
        return None
    return Fraction(a, b) ** num


def _const_pow(c: Rational, e: Rational) -> "Expr":
    """c**e for a nonzero rational c and rational e as an expression."""
    if _is_int(e):
        return Expr._const(Fraction(c) ** int(e))
    e = Fraction(e)
    c = Fraction(c)
    sign = 1
    if c < 0:
        if e.denominator % 2 == 0:
            raise ValueError(f"even root of negative constant {c}")
        c = -c
        sign = -1 if e.numerator % 2 else 1
    exact = _rational_root(c, e)
    if exact is not None:
        return Expr._const(sign * exact)
    # pull perfect s-th powers out of numerator and denominator: 8^(1/2) = 2*2^(1/2)
    s = e.denominator
    a1, b1 = _split_power(c.numerator, s)
    a2, b2 = _split_power(c.denominator, s)
    outer = Fraction(a1, a2) ** e.numerator
    c = Fraction(b1, b2)
    fl = math.floor(e)
    rest = e - fl
    return Expr({((_root_atom(c), rest),): sign * outer * c ** fl})


def _split_power(n: int, s: int) -> tuple:
    """Write n = a^s * b with b free of s-th powers of primes below 1000."""
    a = 1
    for prime in _SMALL_PRIMES:
        ps = prime ** s
        if ps > n:
            break
        while n % ps == 0:
            n //= ps
            a *= prime
    return a, n


_SMALL_PRIMES = [p for p in range(2, 1000) if all(p % d for d in range(2, int(p ** 0.5) + 1))]


# ---------------------------------------------------------------- Expr

class Expr:
    """Immutable canonical expression.  Build with :func:`sym`, :func:`const` and operators."""

    __slots__ = ("_d", "_hash", "_key", "_free", "_str", "__weakref__")

    def __init__(self, d: dict):
        self._d = d
        self._hash = None
        self._key = None
        self._free = None
        self._str = None

    # construction helpers
    @staticmethod
    def _const(c: Rational) -> "Expr":
        return Expr({(): c} if c else {})

    @staticmethod
    def coerce(x) -> "Expr":
        if isinstance(x, Expr):
            return x
        return Expr._const(as_rational(x))

    # identity
    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._d.items()))
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, Expr):
            return self is other or self._d == other._d
        if isinstance(other, (int, Fraction, float)):
            return self._d == Expr.coerce(other)._d
        return NotImplemented

    def __ne__(self, other) -> bool:
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    @property
    def key(self) -> str:
        if self._key is None:
            parts = []
            for m, c in self.sorted_terms():
                mk = ".".join(f"{a.key}^{e}" for a, e in m)
                parts.append(f"{mk}*{c}")
            self._key = "[" + "+".join(parts) + "]"
        return self._key

    @property
    def free_symbols(self) -> frozenset:
        if self._free is None:
            s: set = set()
            for m in self._d:
                for a, _ in m:
                    s |= a.free
            self._free = frozenset(s)
        return self._free

    def sorted_terms(self) -> list:
        """Terms in canonical print order: higher degree first, then by atom keys."""
        def k(item):
            m, _ = item
            deg = sum((e for _, e in m), 0)
            return (-deg, tuple((a.key, -e) for a, e in m))
        return sorted(self._d.items(), key=k)

    # predicates
    @property
    def is_zero_form(self) -> bool:
        return not self._d

    @property
    def is_constant(self) -> bool:
        return not self._d or (len(self._d) == 1 and () in self._d)

    @property
    def is_rational(self) -> bool:
        return self.is_constant

    def as_rational(self) -> Rational:
        if not self.is_constant:
            raise ValueError(f"{self} is not a rational constant")
        return self._d.get((), 0)

    def __bool__(self) -> bool:
        return bool(self._d)

    def __len__(self) -> int:
        return len(self._d)

    def terms(self) -> list:
        """List of ``(coefficient, factors)`` with factors ``[(atom, exponent), ...]``."""
        return [(c, list(m)) for m, c in self.sorted_terms()]

    # arithmetic
    def __add__(self, other) -> "Expr":
        other = Expr.coerce(other)
        if not other._d:
            return self
        if not self._d:
            return other
        d = dict(self._d)
        _padd_into(d, other._d)
        return Expr(d)

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr({m: -c for m, c in self._d.items()})

    def __pos__(self) -> "Expr":
        return self

    def __sub__(self, other) -> "Expr":
        other = Expr.coerce(other)
        if not other._d:
            return self
        d = dict(self._d)
        _padd_into(d, other._d, -1)
        return Expr(d)

    def __rsub__(self, other) -> "Expr":
        return Expr.coerce(other) - self

    def __mul__(self, other) -> "Expr":
        other = Expr.coerce(other)
        if not self._d or not other._d:
            return ZERO
        if other.is_constant:
            c = other._d[()]
            return self if c == 1 else Expr({m: v * c for m, v in self._d.items()})
        if self.is_constant:
            c = self._d[()]
            return other if c == 1 else Expr({m: v * c for m, v in other._d.items()})
        return Expr(_pmul(self._d, other._d))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Expr":
        other = Expr.coerce(other)
        if other.is_constant:
            c = other.as_rational()
            if c == 0:
                raise ZeroDivisionError("division by zero constant")
            return self * Expr._const(Fraction(1) / Fraction(c))
        return self * other ** -1

    def __rtruediv__(self, other) -> "Expr":
        return Expr.coerce(other) / self

    def __pow__(self, e) -> "Expr":
        if isinstance(e, Expr):
            e = e.as_rational()
        e = as_rational(e)
        return _expr_pow(self, e)

    def __rpow__(self, other) -> "Expr":
        raise TypeError("exponents must be rational constants")

    # calculus and substitution (implemented in calculus.py, bound here for convenience)
    def diff(self, name: str) -> "Expr":
        return _diff(self, name)

    def subs(self, bindings: Mapping[str, object]) -> "Expr":
        return _subs(self, {k: Expr.coerce(v) for k, v in bindings.items()})

    def evaluate(self, point: Mapping[str, float]) -> float:
        from .evaluate import evaluate
        return evaluate(self, point)

    def simplify(self) -> "Expr":
        """Expressions are kept canonical, so this is the identity."""
        return self

    # tree view
    @property
    def op(self) -> str:
        """Head of the tree view: const, sym, add, mul, pow or func."""
        if self.is_constant:
            return "const"
        if len(self._d) > 1:
            return "add"
        (m, c), = self._d.items()
        if c != 1 or len(m) > 1:
            return "mul"
        a, e = m[0]
        if e != 1:
            return "pow"
        return "sym" if a.kind == "sym" else "func"

    @property
    def args(self) -> tuple:
        """Children of the tree view."""
        op = self.op
        if op == "const":
            return (self.as_rational(),)
        if op == "add":
            return tuple(Expr({m: c}) for m, c in self.sorted_terms())
        (m, c), = self._d.items()
        if op == "mul":
            parts = [] if c == 1 else [Expr._const(c)]
            return tuple(parts + [Expr({((a, e),): 1}) for a, e in m])
        a, e = m[0]
        if op == "pow":
            return (_atom_expr(a), e)
        if op == "sym":
            return (a.name,)
        return (a.name, a.arg)

    # printing
    def __str__(self) -> str:
        if self._str is None:
            from .printer import to_string
            self._str = to_string(self)
        return self._str

    def __repr__(self) -> str:
        return f"Expr({str(self)!r})"


def _atom_expr(a: Atom) -> Expr:
    """The expression an atom stands for (used by the tree view and evaluators)."""
    if a.kind == "sum":
        return a.base
    if a.kind == "root":
        return Expr._const(a.value)
    return Expr({((a, 1),): 1})


def _expr_pow(x: Expr, e: Rational) -> Expr:
    if e == 0:
        return ONE
    if e == 1:
        return x
    if not x._d:
        if e > 0:
            return ZERO
        raise ZeroDivisionError("zero raised to a negative power")
    if _is_int(e) and e > 0:
        return Expr(_pow_nat(x._d, int(e)))
    if len(x._d) == 1:
        (m, c), = x._d.items()
        if c < 0 and not _is_int(e) and Fraction(e).denominator % 2 == 0:
            return Expr(_normalize({_sum_atom(x): e}))
        coeff = _const_pow(c, e)
        if not m:
            return coeff
        d: dict = {}
        for a, k in m:
            if a.kind == "func" and a.name == "exp":
                d[_func_atom("exp", a.arg * e)] = 1
            else:
                d[a] = d.get(a, 0) + k * e
        return Expr(_normalize(d)) * coeff
    # multi-term base: first split off the monomial content shared by all terms,
    # so that e.g. r^2 * r^(1/2) (the expanded form of r^(5/2)) inverts to r^(-5/2)
    common = None
    for m in x._d:
        dm = dict(m)
        common = dm if common is None else {a: min(k, dm[a]) for a, k in common.items() if a in dm}
    common = {a: k for a, k in common.items() if k != 0}
    if common:
        rest = Expr({tuple((a, k - common.get(a, 0)) for a, k in m if k != common.get(a, 0)): c
                     for m, c in x._d.items()})
        return _expr_pow(Expr(_normalize(common)), e) * _expr_pow(rest, e)
    # then pull the leading coefficient out so the atom is canonical
    lead = x.sorted_terms()[0][1]
    if not _is_int(e) and lead < 0:
        lead = -lead
    base = x * Expr._const(Fraction(1) / Fraction(lead))
    return Expr(_normalize({_sum_atom(base): e})) * _const_pow(lead, e)


# ---------------------------------------------------------------- constructors

ZERO = Expr({})
ONE = Expr({(): 1})


def const(value: Number) -> Expr:
    return Expr.coerce(value)


def sym(name: str) -> Expr:
    return Expr({((symbol_atom(name), 1),): 1})


def symbols(names: Iterable[str] | str) -> tuple:
    if isinstance(names, str):
        names = names.replace(",", " ").split()
    return tuple(sym(n) for n in names)


def _lead_negative(x: Expr) -> bool:
    return bool(x._d) and x.sorted_terms()[0][1] < 0


def exp(x) -> Expr:
    x = Expr.coerce(x)
    if not x._d:
        return ONE
    if x.op == "func" and x.args[0] == "log":
        return x.args[1]
    return Expr(_normalize({_func_atom("exp", x): 1}))


def log(x) -> Expr:
    x = Expr.coerce(x)
    if x == ONE:
        return ZERO
    if x.op == "func" and x.args[0] == "exp":
        return x.args[1]
    if x.is_constant and x.as_rational() <= 0:
        raise ValueError(f"log of non-positive constant {x}")
    return Expr({((_func_atom("log", x), 1),): 1})


def sin(x) -> Expr:
    x = Expr.coerce(x)
    if not x._d:
        return ZERO
    if _lead_negative(x):
        return -sin(-x)
    return Expr({((_func_atom("sin", x), 1),): 1})


def cos(x) -> Expr:
    x = Expr.coerce(x)
    if not x._d:
        return ONE
    if _lead_negative(x):
        x = -x
    return Expr({((_func_atom("cos", x), 1),): 1})


def sqrt(x) -> Expr:
    return Expr.coerce(x) ** Fraction(1, 2)


FUNCTION_TABLE = {"exp": exp, "log": log, "sin": sin, "cos": cos, "sqrt": sqrt}


def apply_function(name: str, x) -> Expr:
    try:
        f = FUNCTION_TABLE[name]
    except KeyError:
        raise ValueError(f"unknown function {name!r}") from None
    return f(x)


# ---------------------------------------------------------------- differentiation

_atom_diff_cache: dict = {}


def _atom_diff(a: Atom, name: str) -> Expr:
    k = (a, name)
    r = _atom_diff_cache.get(k)
    if r is not None:
        return r
    if a.kind == "sym":
        r = ONE if a.name == name else ZERO
    elif a.kind == "sum":
        r = _diff(a.base, name)
    elif a.kind == "root":
        r = ZERO
    else:
        da = _diff(a.arg, name)
        if a.name == "exp":
            r = exp(a.arg) * da
        elif a.name == "log":
            r = da * a.arg ** -1
        elif a.name == "sin":
            r = cos(a.arg) * da
        else:
            r = -sin(a.arg) * da
    _atom_diff_cache[k] = r
    return r


def _diff(x: Expr, name: str) -> Expr:
    if name not in x.free_symbols:
        return ZERO
    acc: dict = {}
    for m, c in x._d.items():
        for i, (a, e) in enumerate(m):
            if name not in a.free:
                continue
            da = _atom_diff(a, name)
            if not da._d:
                continue
            rest = dict(m)
            rest[a] = e - 1
            part = _normalize(rest)
            _padd_into(acc, _pmul(part, da._d), c * e)
    return Expr(acc)


# ---------------------------------------------------------------- substitution

def _subs(x: Expr, bindings: Mapping[str, Expr]) -> Expr:
    if not bindings or not (x.free_symbols & bindings.keys()):
        return x
    keys = bindings.keys()
    cache: dict = {}

    def atom_value(a: Atom) -> Expr:
        r = cache.get(a)
        if r is None:
            if a.kind == "sym":
                r = bindings[a.name]
            elif a.kind == "sum":
                r = _subs(a.base, bindings)
            else:
                r = apply_function(a.name, _subs(a.arg, bindings))
            cache[a] = r
        return r

    acc: dict = {}
    for m, c in x._d.items():
        kept = []
        term = None
        for a, e in m:
            if a.free & keys:
                f = atom_value(a) ** e
                term = f if term is None else term * f
            else:
                kept.append((a, e))
        if term is None:
            _padd_into(acc, {m: c})
            continue
        if kept:
            term = term * Expr(_normalize(dict(kept)))
        _padd_into(acc, term._d, c)
    return Expr(acc)


def _monomial_factor(a: Atom, k: Rational) -> Expr:
    """Unnormalized single-factor monomial ``a^k``; only valid as a multiplier."""
    return Expr({((a, k),): 1})
