"""Prolongations, the first variational formula, symmetries, currents and Noether identities."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

from .dynamics import SecondOrderEquation, _exprs
from .lagrangian import LagrangeOperator, Lagrangian, euler_lagrange, momenta, on_shell
from .symcore import (CoordSystem, Expr, Verdict, ZERO, is_zero, parse,
                      total_derivative, zero_test)

NOETHER_JET_CAP = 4


@dataclass(frozen=True)
class VectorFieldOnJets:
    """``u = u^t d_t + u^i d_i`` with ``u^t`` in {0, 1} and ``u^i`` of jet order at most 1."""

    cs: CoordSystem
    ut: int
    u: tuple

    def __post_init__(self):
        if self.ut not in (0, 1):
            raise ValueError("u^t must be 0 or 1")
        u = _exprs(self.cs, self.u)
        if len(u) != self.cs.dim:
            raise ValueError(f"expected {self.cs.dim} components")
        object.__setattr__(self, "u", u)

    @property
    def is_classical(self) -> bool:
        return all(self.cs.jet_order(x) == 0 for x in self.u)

    def vertical_part(self) -> "VectorFieldOnJets":
        """``u_V = (u^i - q^i_t u^t) d_i``."""
        cs = self.cs
        return VectorFieldOnJets(cs, 0, tuple(x - self.ut * cs.qt(i) for i, x in enumerate(self.u)))


@dataclass(frozen=True)
class Prolongation:
    ut: int
    u: tuple
    du: tuple            # coefficients on d^t_i
    ddu: Optional[tuple] = None   # coefficients on d^tt_i (second order)


class SymmetryKind(str, enum.Enum):
    EXACT = "Exact"
    VARIATIONAL = "Variational"
    NOT_SHOWN = "NotShown"

    def __str__(self) -> str:
        return self.value


@dataclass
class SymmetryClass:
    kind: SymmetryKind
    residual: Expr             # L_{J^1 u} L, minus d_t sigma when sigma was supplied
    sigma: Optional[Expr] = None

    @property
    def is_symmetry(self) -> bool:
        return self.kind is not SymmetryKind.NOT_SHOWN


def prolong(u: VectorFieldOnJets, order: int = 1) -> Prolongation:
    if order not in (1, 2):
        raise ValueError("prolongation order must be 1 or 2")
    cs = u.cs
    du = tuple(total_derivative(x, cs) for x in u.u)
    ddu = tuple(total_derivative(x, cs) for x in du) if order == 2 else None
    return Prolongation(u.ut, u.u, du, ddu)


def lie_derivative_L(u: VectorFieldOnJets, L: Lagrangian) -> Expr:
    cs = L.cs
    pr = prolong(u)
    s = L.L.diff(cs.time) if u.ut else ZERO
    for i in range(cs.dim):
        s = s + pr.u[i] * L.L.diff(cs.jet(i, 0)) + pr.du[i] * L.L.diff(cs.jet(i, 1))
    return s


def _sigma(L: Lagrangian, sigma) -> Expr:
    if sigma is None:
        return ZERO
    return parse(sigma, L.cs) if isinstance(sigma, str) else Expr.coerce(sigma)


def symmetry_current(u: VectorFieldOnJets, L: Lagrangian, sigma=None) -> Expr:
    """``T_u = pi_i (u^i - u^t q^i_t) + u^t L - sigma``."""
    cs = L.cs
    pi = momenta(L)
    s = sum((pi[i] * (u.u[i] - u.ut * cs.qt(i)) for i in range(cs.dim)), ZERO)
    return s + u.ut * L.L - _sigma(L, sigma)


def first_variational_residual(u: VectorFieldOnJets, L: Lagrangian) -> Expr:
    """Left minus right side of the first variational formula on second jets."""
    cs = L.cs
    E = euler_lagrange(L).E
    rhs = sum(((u.u[i] - cs.qt(i) * u.ut) * E[i] for i in range(cs.dim)), ZERO)
    rhs = rhs + total_derivative(symmetry_current(u, L), cs)
    return lie_derivative_L(u, L) - rhs


def check_first_variational(u: VectorFieldOnJets, L: Lagrangian, seed: Optional[int] = None) -> Verdict:
    return is_zero(first_variational_residual(u, L), seed)


def classify_symmetry(u: VectorFieldOnJets, L: Lagrangian, sigma=None,
                      seed: Optional[int] = None) -> SymmetryClass:
    lie = lie_derivative_L(u, L)
    if is_zero(lie, seed) is Verdict.ZERO:
        return SymmetryClass(SymmetryKind.EXACT, lie, None)
    if sigma is not None:
        s = _sigma(L, sigma)
        if L.cs.jet_order(s) > 1:
            raise ValueError("sigma must have jet order <= 1")
        r = lie - total_derivative(s, L.cs)
        if is_zero(r, seed) is Verdict.ZERO:
            return SymmetryClass(SymmetryKind.VARIATIONAL, r, s)
        return SymmetryClass(SymmetryKind.NOT_SHOWN, r, s)
    return SymmetryClass(SymmetryKind.NOT_SHOWN, lie, None)


def vertical_sigma(u: VectorFieldOnJets, L: Lagrangian, sigma=None) -> Expr:
    """Adjusted ``sigma_V = sigma - u^t L`` that goes with the vertical part of ``u``."""
    return _sigma(L, sigma) - u.ut * L.L


def conservation_residual(current: Expr, u: VectorFieldOnJets, L: Lagrangian) -> Expr:
    """``d_t T_u + (u^i - q^i_t u^t) E_i``; vanishes identically for exact symmetries."""
    cs = L.cs
    E = euler_lagrange(L).E
    return total_derivative(current, cs) + sum(((u.u[i] - cs.qt(i) * u.ut) * E[i]
                                                for i in range(cs.dim)), ZERO)


def on_shell_derivative(F: Expr, eq: SecondOrderEquation) -> Expr:
    """``d_t F`` with ``q_tt`` replaced by the equation's right side."""
    return on_shell([total_derivative(F, eq.cs)], eq)[0]


# ---------------------------------------------------------------- gauge symmetries

@dataclass(frozen=True)
class GaugeSymmetry:
    """``u^i = u^i_a chi^a + u^{it}_a chi^a_t + u^{itt}_a chi^a_tt``.

    ``coeffs[a]`` holds three n-vectors: the coefficients of ``chi^a``, ``chi^a_t`` and
    ``chi^a_tt``.
    """

    cs: CoordSystem
    coeffs: tuple

    def __post_init__(self):
        out = []
        for block in self.coeffs:
            if len(block) != 3:
                raise ValueError("each gauge parameter needs coefficients of chi, chi_t, chi_tt")
            out.append(tuple(_exprs(self.cs, part) for part in block))
        object.__setattr__(self, "coeffs", tuple(out))

    def as_vector_field(self, names: Sequence[str] = ()) -> VectorFieldOnJets:
        """The field on the system extended by the gauge parameters as fibre coordinates."""
        k = len(self.coeffs)
        names = tuple(names) or tuple(f"chi{a + 1}" for a in range(k))
        ext = self.cs.extended(extra_coords=names)
        n = self.cs.dim
        comps = []
        for i in range(n):
            s = ZERO
            for a, (c0, c1, c2) in enumerate(self.coeffs):
                s = s + c0[i] * ext.q(n + a) + c1[i] * ext.q(n + a, 1) + c2[i] * ext.q(n + a, 2)
            comps.append(s)
        comps += [ZERO] * k
        return VectorFieldOnJets(ext, 0, tuple(comps))


def noether_identity_residuals(g: GaugeSymmetry, op: LagrangeOperator) -> tuple:
    cs = op.cs
    n = cs.dim
    out = []
    for c0, c1, c2 in g.coeffs:
        s0 = sum((c0[i] * op.E[i] for i in range(n)), ZERO)
        s1 = sum((c1[i] * op.E[i] for i in range(n)), ZERO)
        s2 = sum((c2[i] * op.E[i] for i in range(n)), ZERO)
        d1 = total_derivative(s1, cs, cap=NOETHER_JET_CAP)
        d2 = total_derivative(total_derivative(s2, cs, cap=NOETHER_JET_CAP), cs, cap=NOETHER_JET_CAP)
        out.append(s0 - d1 + d2)
    return tuple(out)


def noether_identity_check(g: GaugeSymmetry, op: LagrangeOperator,
                           seed: Optional[int] = None) -> tuple:
    """Verdict per gauge parameter."""
    return tuple(zero_test(r, seed).verdict for r in noether_identity_residuals(g, op))


def numeric_conservation(current: Expr, traj, params: Optional[dict] = None):
    from .numerics import conservation_drift
    return conservation_drift(current, traj, params)


__all__ = [
    "GaugeSymmetry", "Prolongation", "SymmetryClass", "SymmetryKind", "VectorFieldOnJets",
    "check_first_variational", "classify_symmetry", "conservation_residual",
    "first_variational_residual", "lie_derivative_L", "noether_identity_check",
    "noether_identity_residuals", "numeric_conservation", "on_shell_derivative", "prolong",
    "symmetry_current", "vertical_sigma",
]
