"""Hamiltonian formalism on the phase space (t, q, p)."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import linalg
from .dynamics import NotQuadratic
from .frames import ReferenceFrame
from .lagrangian import LagrangeOperator, Lagrangian, euler_lagrange
from .symcore import CoordSystem, Expr, Verdict, ZERO, all_zero, is_zero, parse
from .symmetry import SymmetryKind, VectorFieldOnJets

HALF = Fraction(1, 2)


def _phase_expr(cs: CoordSystem, x) -> Expr:
    e = parse(x, cs) if isinstance(x, str) else Expr.coerce(x)
    if cs.jet_order(e) > 0:
        raise ValueError(f"phase functions depend on (t, q, p) only: {e}")
    return e


@dataclass(frozen=True)
class Hamiltonian:
    cs: CoordSystem
    H: Expr

    def __post_init__(self):
        if len(self.cs.momenta) != self.cs.dim:
            raise ValueError("the coordinate system needs one momentum per coordinate")
        object.__setattr__(self, "H", _phase_expr(self.cs, self.H))


@dataclass(frozen=True)
class HamiltonVectorField:
    """Components ``(1, d^i H, -d_i H)`` on ``(t, q, p)``."""

    cs: CoordSystem
    dq: tuple
    dp: tuple

    def components(self) -> tuple:
        return (Expr.coerce(1),) + self.dq + self.dp


@dataclass(frozen=True)
class PhaseVectorField:
    """``u^t d_t + u^i d_i + u_i d^i`` on the phase space."""

    cs: CoordSystem
    ut: Expr
    uq: tuple
    up: tuple

    def components(self) -> tuple:
        return (self.ut,) + self.uq + self.up


def _q(cs, i):
    return cs.jet(i, 0)


def _p(cs, i):
    return cs.momenta[i]


def poisson_bracket(f, g, cs: CoordSystem) -> Expr:
    """``{f, g} = d^i f d_i g - d^i g d_i f``."""
    f = _phase_expr(cs, f)
    g = _phase_expr(cs, g)
    s = ZERO
    for i in range(cs.dim):
        s = s + f.diff(_p(cs, i)) * g.diff(_q(cs, i)) - g.diff(_p(cs, i)) * f.diff(_q(cs, i))
    return s


def hamilton_equations(H: Hamiltonian) -> tuple:
    """``(q_t, p_t)`` right sides: ``q^k_t = d^k H``, ``p_tk = -d_k H``."""
    cs = H.cs
    dq = tuple(H.H.diff(_p(cs, i)) for i in range(cs.dim))
    dp = tuple(-H.H.diff(_q(cs, i)) for i in range(cs.dim))
    return dq, dp


def hamilton_vector_field(H: Hamiltonian) -> HamiltonVectorField:
    dq, dp = hamilton_equations(H)
    return HamiltonVectorField(H.cs, dq, dp)


def evolution(F, H: Hamiltonian) -> Expr:
    """``d_t F + {H, F}``; F is an integral of motion iff this vanishes."""
    F = _phase_expr(H.cs, F)
    return F.diff(H.cs.time) + poisson_bracket(H.H, F, H.cs)


# ---------------------------------------------------------------- Legendre inversion

@dataclass
class QuadraticLagrangian:
    """``L = 1/2 m_ij v^i v^j + b_i v^i + c``."""

    m: tuple
    b: tuple
    c: Expr


def split_quadratic_lagrangian(L: Lagrangian) -> QuadraticLagrangian:
    cs = L.cs
    n = cs.dim
    v = [cs.jet(i, 1) for i in range(n)]
    rest = cs.velocity_zero()
    grad = [L.L.diff(x) for x in v]
    m = tuple(tuple(grad[i].diff(v[j]) for j in range(n)) for i in range(n))
    for row in m:
        for x in row:
            if cs.jet_order(x) > 0:
                raise NotQuadratic("Legendre inversion supports Lagrangians quadratic in the "
                                   "velocities; integrate the Lagrangian connection numerically instead")
    b = tuple(g.subs(rest) for g in grad)
    c = L.L.subs(rest)
    rebuilt = c
    for i in range(n):
        rebuilt = rebuilt + b[i] * cs.qt(i)
        for j in range(n):
            rebuilt = rebuilt + HALF * m[i][j] * cs.qt(i) * cs.qt(j)
    if is_zero(L.L - rebuilt) is not Verdict.ZERO:
        raise NotQuadratic("Legendre inversion supports Lagrangians quadratic in the velocities")
    return QuadraticLagrangian(m, b, c)


def legendre_invert(L: Lagrangian) -> Hamiltonian:
    """``H = 1/2 (p - b)^T m^{-1} (p - b) - c`` for a quadratic Lagrangian."""
    cs = L.cs
    if len(cs.momenta) != cs.dim:
        cs = CoordSystem(cs.coords, tuple(f"p{i + 1}" for i in range(cs.dim)), cs.params, cs.time)
    n = cs.dim
    quad = split_quadratic_lagrangian(L)
    minv = linalg.inverse(quad.m)
    shifted = [cs.p(i) - quad.b[i] for i in range(n)]
    H = -quad.c
    for i in range(n):
        for j in range(n):
            if minv[i][j]:
                H = H + HALF * shifted[i] * minv[i][j] * shifted[j]
    return Hamiltonian(cs, H)


def legendre_consistency(H: Hamiltonian, L: Lagrangian) -> Verdict:
    """``H = p_i d^i H - L(t, q, d^i H)``."""
    cs = H.cs
    dq, _ = hamilton_equations(H)
    b = {cs.jet(i, 1): dq[i] for i in range(cs.dim)}
    lhs = sum((cs.p(i) * dq[i] for i in range(cs.dim)), ZERO) - L.L.subs(b)
    return is_zero(H.H - lhs)


# ---------------------------------------------------------------- L_H

@dataclass
class PhaseLagrangian:
    lagrangian: Lagrangian       # on the system with fibre coordinates (q, p)
    operator: LagrangeOperator
    expected: tuple              # (q_t - d^i H) then -(p_t + d_i H)
    verdict: Verdict


def lagrangian_LH(H: Hamiltonian) -> PhaseLagrangian:
    """``L_H = p_i q^i_t - H`` on the system whose fibre coordinates are (q, p)."""
    cs = H.cs
    n = cs.dim
    ext = CoordSystem(cs.coords + cs.momenta, (), cs.params, cs.time)
    LH = sum((ext.q(n + i) * ext.qt(i) for i in range(n)), ZERO) - H.H
    lag = Lagrangian(ext, LH)
    op = euler_lagrange(lag)
    dq, dp = hamilton_equations(H)
    expected = [-(ext.qt(n + i) - dp[i]) for i in range(n)]
    expected += [ext.qt(i) - dq[i] for i in range(n)]
    # EL components come in fibre order: first the q-equations, then the p-equations
    verdict = all_zero(a - b for a, b in zip(op.E, expected))
    return PhaseLagrangian(lag, op, tuple(expected), verdict)


# ---------------------------------------------------------------- lifts and symmetries

def canonical_lift(u: VectorFieldOnJets) -> PhaseVectorField:
    """``u^t d_t + u^i d_i - p_j d_i u^j d^i``."""
    cs = u.cs
    if not u.is_classical:
        raise ValueError("canonical lift needs a classical field u(t, q)")
    n = cs.dim
    up = tuple(-sum((cs.p(j) * u.u[j].diff(_q(cs, i)) for j in range(n)), ZERO) for i in range(n))
    return PhaseVectorField(cs, Expr.coerce(u.ut), u.u, up)


def lift_trace_condition(lift: PhaseVectorField) -> Verdict:
    """Necessary condition ``d^i u_i = -d_i u^i`` for a Hamiltonian symmetry."""
    cs = lift.cs
    s = sum((lift.up[i].diff(_p(cs, i)) + lift.uq[i].diff(_q(cs, i)) for i in range(cs.dim)), ZERO)
    return is_zero(s)


@dataclass
class HamiltonianSymmetry:
    current: Expr
    kind: SymmetryKind
    residual: Expr


def hamiltonian_symmetry_residual(u: VectorFieldOnJets, H: Hamiltonian) -> Expr:
    cs = H.cs
    n = cs.dim
    s = -u.ut * H.H.diff(cs.time)
    for i in range(n):
        s = s + cs.p(i) * u.u[i].diff(cs.time) - u.u[i] * H.H.diff(_q(cs, i))
        for j in range(n):
            s = s + cs.p(i) * u.u[i].diff(_q(cs, j)) * H.H.diff(_p(cs, j))
    return s


def hamiltonian_symmetry_current(u: VectorFieldOnJets, H: Hamiltonian) -> HamiltonianSymmetry:
    """Current ``p_i u^i - u^t H`` with an Exact/NotShown verdict for the lifted field."""
    if not u.is_classical:
        raise ValueError("Hamiltonian symmetry currents need a classical field u(t, q)")
    cs = H.cs
    current = sum((cs.p(i) * u.u[i] for i in range(cs.dim)), ZERO) - u.ut * H.H
    r = hamiltonian_symmetry_residual(u, H)
    kind = SymmetryKind.EXACT if is_zero(r) is Verdict.ZERO else SymmetryKind.NOT_SHOWN
    return HamiltonianSymmetry(current, kind, r)


def frame_energy(H: Hamiltonian, fr: Optional[ReferenceFrame] = None) -> Expr:
    """``E_Gamma = H - p_i Gamma^i``."""
    if fr is None:
        return H.H
    return H.H - sum((H.cs.p(i) * g for i, g in enumerate(fr.Gamma)), ZERO)


# ---------------------------------------------------------------- vector field calculus

def phase_coordinates(cs: CoordSystem) -> list:
    return [cs.time] + [_q(cs, i) for i in range(cs.dim)] + list(cs.momenta)


def apply_field(X: Sequence[Expr], f: Expr, coords: Sequence[str]) -> Expr:
    return sum((x * f.diff(c) for x, c in zip(X, coords) if x), ZERO)


def lie_bracket(X: Sequence[Expr], Y: Sequence[Expr], coords: Sequence[str]) -> tuple:
    return tuple(apply_field(X, Y[a], coords) - apply_field(Y, X[a], coords)
                 for a in range(len(coords)))


def hamiltonian_field_of(F, cs: CoordSystem) -> tuple:
    """``theta_F = d^i F d_i - d_i F d^i`` as components on (t, q, p)."""
    F = _phase_expr(cs, F)
    return ((ZERO,) + tuple(F.diff(_p(cs, i)) for i in range(cs.dim))
            + tuple(-F.diff(_q(cs, i)) for i in range(cs.dim)))


def commutation_residual(F, H: Hamiltonian) -> tuple:
    """``[gamma_H, theta_F] - theta_{L_gamma_H F}`` componentwise."""
    cs = H.cs
    coords = phase_coordinates(cs)
    gam = hamilton_vector_field(H).components()
    br = lie_bracket(gam, hamiltonian_field_of(F, cs), coords)
    target = hamiltonian_field_of(evolution(F, H), cs)
    return tuple(a - b for a, b in zip(br, target))


__all__ = [
    "HamiltonVectorField", "Hamiltonian", "HamiltonianSymmetry", "PhaseLagrangian",
    "PhaseVectorField", "QuadraticLagrangian", "apply_field", "canonical_lift",
    "commutation_residual", "evolution", "frame_energy", "hamilton_equations",
    "hamilton_vector_field", "hamiltonian_field_of", "hamiltonian_symmetry_current",
    "hamiltonian_symmetry_residual", "lagrangian_LH", "legendre_consistency", "legendre_invert",
    "lie_bracket", "lift_trace_condition", "phase_coordinates", "poisson_bracket",
    "split_quadratic_lagrangian",
]
