"""First-order Lagrangian formalism."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import linalg
from .dynamics import SecondOrderEquation, _exprs
from .frames import ReferenceFrame
from .symcore import (CoordSystem, Expr, Verdict, ZERO, all_zero, combine, evaluate,
                      parse, total_derivative, zero_test)
from .symcore.evaluate import EvaluationError
from .symcore.zero import default_seed


@dataclass(frozen=True)
class Lagrangian:
    cs: CoordSystem
    L: Expr

    def __post_init__(self):
        L = parse(self.L, self.cs) if isinstance(self.L, str) else Expr.coerce(self.L)
        if self.cs.jet_order(L) > 1:
            raise ValueError(f"a first-order Lagrangian depends on (t, q, q_t) only: {L}")
        object.__setattr__(self, "L", L)


@dataclass(frozen=True)
class LagrangeOperator:
    cs: CoordSystem
    E: tuple

    def __post_init__(self):
        E = _exprs(self.cs, self.E)
        if len(E) != self.cs.dim:
            raise ValueError(f"expected {self.cs.dim} components")
        object.__setattr__(self, "E", E)


class Regularity(str, enum.Enum):
    REGULAR = "regular"
    DEGENERATE = "degenerate"
    POINTWISE = "pointwise-degenerate"

    def __str__(self) -> str:
        return self.value


@dataclass
class LegendreData:
    pi: tuple
    hessian: tuple
    det: Expr
    regularity: Regularity
    certified: bool = True            # regularity decided symbolically
    locus: list = field(default_factory=list)   # where the determinant can vanish


def momenta(L: Lagrangian) -> tuple:
    cs = L.cs
    return tuple(L.L.diff(cs.jet(i, 1)) for i in range(cs.dim))


def euler_lagrange(L: Lagrangian) -> LagrangeOperator:
    """``E_i = d_i L - d_t d^t_i L``."""
    cs = L.cs
    pi = momenta(L)
    E = tuple(L.L.diff(cs.jet(i, 0)) - total_derivative(pi[i], cs) for i in range(cs.dim))
    return LagrangeOperator(cs, E)


# ---------------------------------------------------------------- Helmholtz

@dataclass
class HelmholtzReport:
    a: dict   # (i, j) -> ZeroTest
    b: dict
    c: dict
    residuals: dict  # (condition, i, j) -> Expr

    def condition(self, name: str) -> Verdict:
        return combine(t.verdict for t in getattr(self, name).values())

    @property
    def verdict(self) -> Verdict:
        return combine(self.condition(k) for k in "abc")

    @property
    def flagged(self) -> list:
        """Pairs whose verdict rests on sampling only (probable zeros)."""
        return [(k, ij) for k in "abc" for ij, t in getattr(self, k).items()
                if t.verdict is Verdict.UNKNOWN]


def helmholtz_check(op: LagrangeOperator, seed: Optional[int] = None) -> HelmholtzReport:
    cs = op.cs
    n = cs.dim
    E = op.E
    q = [cs.jet(i, 0) for i in range(n)]
    v = [cs.jet(i, 1) for i in range(n)]
    w = [cs.jet(i, 2) for i in range(n)]
    dv = [[E[i].diff(v[j]) for j in range(n)] for i in range(n)]
    dw = [[E[i].diff(w[j]) for j in range(n)] for i in range(n)]
    res: dict = {}
    out = {"a": {}, "b": {}, "c": {}}
    for i in range(n):
        for j in range(n):
            if i < j:
                ra = E[i].diff(q[j]) - E[j].diff(q[i]) + total_derivative(dv[j][i] - dv[i][j], cs) / 2
                rc = dw[i][j] - dw[j][i]
                res[("a", i, j)] = ra
                res[("c", i, j)] = rc
                out["a"][(i, j)] = zero_test(ra, seed)
                out["c"][(i, j)] = zero_test(rc, seed)
            if i <= j:
                rb = dv[i][j] + dv[j][i] - 2 * total_derivative(dw[i][j], cs)
                res[("b", i, j)] = rb
                out["b"][(i, j)] = zero_test(rb, seed)
    return HelmholtzReport(out["a"], out["b"], out["c"], res)


# ---------------------------------------------------------------- Legendre data

def _vanishing_factors(det: Expr, cs: CoordSystem) -> Optional[list]:
    """For a single-term determinant, the factors that can vanish; None for sums."""
    if len(det) != 1:
        return None
    (coeff, factors), = det.terms()
    locus = []
    for a, e in factors:
        if e <= 0:
            continue
        if a.kind == "sym":
            info = cs.info(a.name)
            if info is not None and info.kind in ("coord", "time"):
                locus.append(f"{a.name} = 0")
        elif a.kind == "sum":
            locus.append(f"{a.base} = 0")
        elif a.kind == "func" and a.name != "exp":
            locus.append(f"{a.text()} = 0")
    return locus


def legendre(L: Lagrangian, seed: Optional[int] = None) -> LegendreData:
    cs = L.cs
    n = cs.dim
    pi = momenta(L)
    hess = tuple(tuple(pi[i].diff(cs.jet(j, 1)) for j in range(n)) for i in range(n))
    d = linalg.det(hess)
    zt = zero_test(d, seed)
    if zt.verdict is Verdict.ZERO:
        return LegendreData(pi, hess, d, Regularity.DEGENERATE)
    locus = _vanishing_factors(d, cs)
    if locus is not None:
        tag = Regularity.POINTWISE if locus else Regularity.REGULAR
        return LegendreData(pi, hess, d, tag, True, locus)
    # multi-term determinant: look for a sign change between random samples
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    names = sorted(x for x in d.free_symbols if x != "pi")
    values = []
    for _ in range(16):
        pt = {x: float(v) for x, v in zip(names, rng.uniform(-2.0, 2.0, len(names)))}
        try:
            values.append((evaluate(d, pt), pt))
        except EvaluationError:
            continue
    pos = [p for v, p in values if v > 0]
    neg = [p for v, p in values if v < 0]
    if pos and neg:
        return LegendreData(pi, hess, d, Regularity.POINTWISE, False,
                            [f"sign change between {pos[0]} and {neg[0]}"])
    return LegendreData(pi, hess, d, Regularity.REGULAR, False, [])


def lagrangian_connection(L: Lagrangian) -> SecondOrderEquation:
    """``xi_L = (pi^{-1}) (d_i L - d_t pi_i - q^k_t d_k pi_i)``."""
    cs = L.cs
    n = cs.dim
    data = legendre(L)
    if data.regularity is Regularity.DEGENERATE:
        raise linalg.SingularMatrixError("Lagrangian is degenerate: the Hessian has zero determinant")
    inv = linalg.inverse(data.hessian)
    rhs = []
    for j in range(n):
        s = L.L.diff(cs.jet(j, 0)) - data.pi[j].diff(cs.time)
        for k in range(n):
            s = s - cs.qt(k) * data.pi[j].diff(cs.jet(k, 0))
        rhs.append(s)
    xi = tuple(sum((inv[i][j] * rhs[j] for j in range(n)), ZERO) for i in range(n))
    return SecondOrderEquation(cs, xi)


def on_shell(exprs, eq: SecondOrderEquation) -> tuple:
    """Substitute ``q_tt -> xi``."""
    cs = eq.cs
    b = {cs.jet(i, 2): x for i, x in enumerate(eq.xi)}
    return tuple(e.subs(b) for e in exprs)


# ---------------------------------------------------------------- Poincare-Cartan

def hat_name(cs: CoordSystem, i: int) -> str:
    return cs.coords[i] + "_hat"


@dataclass
class PoincareCartan:
    cs: CoordSystem          # extended by the auxiliary velocities q^i_hat
    dq: tuple                # coefficients of dq^i
    dt: Expr                 # coefficient of dt
    cartan_a: tuple          # rows i: d^t_i pi_j (qhat^j - q^j_t) summed over j
    cartan_b: tuple

    def h0(self, base: CoordSystem) -> Expr:
        """Horizontal projection ``dq^i -> q^i_t dt``: returns the coefficient of dt."""
        return self.dt + sum((c * base.qt(i) for i, c in enumerate(self.dq)), ZERO)

    def holonomic(self, base: CoordSystem) -> tuple:
        """Cartan residuals with ``qhat = q_t``."""
        b = {hat_name(base, i): base.qt(i) for i in range(base.dim)}
        return tuple(x.subs(b) for x in self.cartan_a), tuple(x.subs(b) for x in self.cartan_b)


def poincare_cartan(L: Lagrangian) -> PoincareCartan:
    cs = L.cs
    n = cs.dim
    hats = [hat_name(cs, i) for i in range(n)]
    ext = cs.extended(extra_params=[(h, None) for h in hats])
    pi = momenta(L)
    dt = L.L - sum((pi[i] * cs.qt(i) for i in range(n)), ZERO)
    diff_v = [Expr.coerce(ext.param(hats[j])) - cs.qt(j) for j in range(n)]

    def hat_dt(e: Expr) -> Expr:
        s = e.diff(cs.time)
        for j in range(n):
            s = s + ext.param(hats[j]) * e.diff(cs.jet(j, 0)) + cs.qtt(j) * e.diff(cs.jet(j, 1))
        return s

    ca, cb = [], []
    for i in range(n):
        ca.append(sum((pi[j].diff(cs.jet(i, 1)) * diff_v[j] for j in range(n)), ZERO))
        s = L.L.diff(cs.jet(i, 0)) - hat_dt(pi[i])
        for j in range(n):
            s = s + pi[j].diff(cs.jet(i, 0)) * diff_v[j]
        cb.append(s)
    return PoincareCartan(ext, pi, dt, tuple(ca), tuple(cb))


# ---------------------------------------------------------------- energies

def energy_function(L: Lagrangian, fr: Optional[ReferenceFrame] = None) -> Expr:
    """``E_Gamma = pi_i (q^i_t - Gamma^i) - L``; the rest frame gives the canonical energy."""
    cs = L.cs
    pi = momenta(L)
    G = fr.Gamma if fr is not None else (ZERO,) * cs.dim
    return sum((pi[i] * (cs.qt(i) - G[i]) for i in range(cs.dim)), ZERO) - L.L


def is_variationally_trivial(L: Lagrangian) -> Verdict:
    return all_zero(euler_lagrange(L).E)


__all__ = [
    "HelmholtzReport", "LagrangeOperator", "Lagrangian", "LegendreData", "PoincareCartan",
    "Regularity", "energy_function", "euler_lagrange", "hat_name", "helmholtz_check",
    "is_variationally_trivial", "lagrangian_connection", "legendre", "momenta", "on_shell",
    "poincare_cartan",
]
