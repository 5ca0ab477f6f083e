"""Newtonian systems: a mass tensor together with a compatible dynamic equation."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .dynamics import SecondOrderEquation, _exprs
from .symcore import CoordSystem, Expr, Verdict, ZERO, all_zero, combine

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class MassTensor:
    cs: CoordSystem
    m: tuple   # rows

    def __post_init__(self):
        rows = tuple(_exprs(self.cs, r) for r in self.m)
        n = self.cs.dim
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ValueError(f"mass tensor must be {n}x{n}")
        if not linalg.is_symmetric(rows):
            raise ValueError("mass tensor must be symmetric")
        for r in rows:
            for x in r:
                if self.cs.jet_order(x) > 1:
                    raise ValueError(f"mass tensor depends on (t, q, q_t) only: {x}")
        object.__setattr__(self, "m", rows)

    @classmethod
    def identity(cls, cs: CoordSystem, scale=1) -> "MassTensor":
        n = cs.dim
        return cls(cs, tuple(tuple(Expr.coerce(scale if i == j else 0) for j in range(n))
                             for i in range(n)))

    @property
    def is_standard(self) -> bool:
        """True when the mass tensor does not depend on the velocities."""
        return all(self.cs.jet_order(x) == 0 for r in self.m for x in r)

    def inverse(self) -> list:
        return linalg.inverse(self.m)


@dataclass(frozen=True)
class ExternalForce:
    cs: CoordSystem
    f: tuple

    def __post_init__(self):
        f = _exprs(self.cs, self.f)
        if len(f) != self.cs.dim:
            raise ValueError(f"force needs {self.cs.dim} components")
        object.__setattr__(self, "f", f)


@dataclass(frozen=True)
class NewtonianSystem:
    mass: MassTensor
    xi: SecondOrderEquation


@dataclass
class NewtonianReport:
    symmetry: Verdict
    compatibility: Verdict
    symmetry_residuals: dict = field(default_factory=dict)       # (i, j, k) -> Expr
    compatibility_residuals: dict = field(default_factory=dict)  # (i, j) -> Expr

    @property
    def verdict(self) -> Verdict:
        return combine([self.symmetry, self.compatibility])

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.ZERO


def evolution_derivative(e: Expr, eq: SecondOrderEquation) -> Expr:
    """``(d_t + q^k_t d_k + xi^k d^t_k) e``."""
    cs = eq.cs
    s = e.diff(cs.time)
    for k in range(cs.dim):
        s = s + cs.qt(k) * e.diff(cs.jet(k, 0)) + eq.xi[k] * e.diff(cs.jet(k, 1))
    return s


def check_newtonian(mass: MassTensor, eq: SecondOrderEquation) -> NewtonianReport:
    cs = eq.cs
    n = cs.dim
    m = mass.m
    sym_res = {}
    for i in range(n):
        for j in range(n):
            for k in range(j + 1, n):
                r = m[i][j].diff(cs.jet(k, 1)) - m[i][k].diff(cs.jet(j, 1))
                sym_res[(i, j, k)] = r
    dxi = [[eq.xi[k].diff(cs.jet(j, 1)) for j in range(n)] for k in range(n)]
    comp_res = {}
    for i in range(n):
        for j in range(i, n):
            s = evolution_derivative(m[i][j], eq)
            for k in range(n):
                s = s + HALF * (m[i][k] * dxi[k][j] + m[j][k] * dxi[k][i])
            comp_res[(i, j)] = s
    return NewtonianReport(all_zero(sym_res.values()), all_zero(comp_res.values()),
                           sym_res, comp_res)


@dataclass
class ForcedEquation:
    equation: SecondOrderEquation
    admissible: Verdict
    residuals: dict


def apply_force(system: NewtonianSystem, force: ExternalForce) -> ForcedEquation:
    """``xi_f = xi + m^{-1} f`` and whether ``d^t_i f_j + d^t_j f_i = 0``."""
    cs = system.xi.cs
    n = cs.dim
    minv = system.mass.inverse()
    xi = tuple(system.xi.xi[i] + sum((minv[i][k] * force.f[k] for k in range(n)), ZERO)
               for i in range(n))
    res = {}
    for i in range(n):
        for j in range(i, n):
            res[(i, j)] = force.f[j].diff(cs.jet(i, 1)) + force.f[i].diff(cs.jet(j, 1))
    return ForcedEquation(SecondOrderEquation(cs, xi), all_zero(res.values()), res)


def equation_of_motion(system: NewtonianSystem) -> tuple:
    """Residuals ``m_ik (q^k_tt - xi^k)``."""
    cs = system.xi.cs
    n = cs.dim
    m = system.mass.m
    acc = system.xi.residual()
    return tuple(sum((m[i][k] * acc[k] for k in range(n)), ZERO) for i in range(n))


__all__ = [
    "ExternalForce", "ForcedEquation", "MassTensor", "NewtonianReport", "NewtonianSystem",
    "apply_force", "check_newtonian", "equation_of_motion", "evolution_derivative",
]
