"""Seeded random generators and a sympy oracle shared by the tests."""
from __future__ import annotations

import itertools

import numpy as np
import sympy

from geomech.symcore import CoordSystem, Expr, parse


def monomials(names, degree):
    out = []
    for d in range(degree + 1):
        out.extend(itertools.combinations_with_replacement(names, d))
    return out


def poly_text(rng: np.random.Generator, names, degree: int, nterms: int, coeff: int = 3) -> str:
    """Random polynomial with small nonzero integer coefficients, as source text."""
    pool = monomials(list(names), degree)
    idx = rng.choice(len(pool), size=min(nterms, len(pool)), replace=False)
    parts = []
    for i in idx:
        c = int(rng.integers(1, coeff + 1)) * (1 if rng.random() < 0.5 else -1)
        mono = "*".join(pool[i])
        parts.append(f"({c})" + (f"*{mono}" if mono else ""))
    return " + ".join(parts) if parts else "0"


def rand_poly(rng, cs: CoordSystem, names, degree=3, nterms=5) -> Expr:
    return parse(poly_text(rng, names, degree, nterms), cs)


def base_names(cs: CoordSystem) -> list:
    return [cs.time] + [cs.jet(i, 0) for i in range(cs.dim)]


def jet1_names(cs: CoordSystem) -> list:
    return base_names(cs) + [cs.jet(i, 1) for i in range(cs.dim)]


def phase_names(cs: CoordSystem) -> list:
    return base_names(cs) + list(cs.momenta)


def random_lagrangian_text(rng, cs: CoordSystem, degree=3, nterms=6) -> str:
    return poly_text(rng, jet1_names(cs), degree, nterms)


def random_quadratic_lagrangian(rng, cs: CoordSystem) -> str:
    """``1/2 v^T M v + b(t, q).v + c(t, q)`` with M constant symmetric positive definite."""
    n = cs.dim
    A = rng.integers(-1, 2, size=(n, n))
    M = A @ A.T + np.diag(rng.integers(1, 3, size=n))
    v = [cs.jet(i, 1) for i in range(n)]
    parts = []
    for i in range(n):
        for j in range(n):
            if M[i, j]:
                parts.append(f"1/2*({int(M[i, j])})*{v[i]}*{v[j]}")
    for i in range(n):
        parts.append(f"({poly_text(rng, base_names(cs), 1, 2)})*{v[i]}")
    parts.append(f"({poly_text(rng, base_names(cs), 2, 3)})")
    return " + ".join(parts)


def to_sympy(e) -> sympy.Expr:
    """Independent reading of the printed form."""
    return sympy.sympify(str(e).replace("^", "**"))


def sympy_equal(a, b) -> bool:
    return sympy.simplify(to_sympy(a) - to_sympy(b)) == 0


def sample_point(rng, names) -> dict:
    vals = rng.uniform(0.3, 1.7, size=len(names)) * np.where(rng.random(len(names)) < 0.5, -1, 1)
    return {n: float(v) for n, v in zip(names, vals)}
