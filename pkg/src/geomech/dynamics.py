"""Second-order dynamic equations and dynamic connections on the velocity space."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .symcore import CoordSystem, Expr, Verdict, ZERO, all_zero, const, is_zero, parse

HALF = Fraction(1, 2)


class NotQuadratic(ValueError):
    """The right-hand side is not a quadratic polynomial in the velocities."""


def _exprs(cs: CoordSystem, items) -> tuple:
    return tuple(parse(x, cs) if isinstance(x, str) else Expr.coerce(x) for x in items)


def _check_order(cs: CoordSystem, exprs, limit: int, what: str) -> None:
    for e in exprs:
        if cs.jet_order(e) > limit:
            raise ValueError(f"{what} must have jet order <= {limit}: {e}")


@dataclass(frozen=True)
class SecondOrderEquation:
    """``q^i_tt = xi^i(t, q, q_t)``."""

    cs: CoordSystem
    xi: tuple

    def __post_init__(self):
        xi = _exprs(self.cs, self.xi)
        if len(xi) != self.cs.dim:
            raise ValueError(f"expected {self.cs.dim} components, got {len(xi)}")
        _check_order(self.cs, xi, 1, "xi")
        object.__setattr__(self, "xi", xi)

    @classmethod
    def free(cls, cs: CoordSystem) -> "SecondOrderEquation":
        return cls(cs, (ZERO,) * cs.dim)

    def residual(self) -> tuple:
        """``q_tt - xi`` on second jets."""
        return tuple(self.cs.qtt(i) - x for i, x in enumerate(self.xi))


@dataclass(frozen=True)
class DynamicConnection:
    """Coefficients ``gamma^i_0`` and ``gamma^i_j`` (row i, column j)."""

    cs: CoordSystem
    gamma0: tuple
    gammaj: tuple

    def __post_init__(self):
        n = self.cs.dim
        g0 = _exprs(self.cs, self.gamma0)
        gj = tuple(_exprs(self.cs, row) for row in self.gammaj)
        if len(g0) != n or len(gj) != n or any(len(r) != n for r in gj):
            raise ValueError("connection components have the wrong shape")
        _check_order(self.cs, g0 + sum(gj, ()), 1, "connection")
        object.__setattr__(self, "gamma0", g0)
        object.__setattr__(self, "gammaj", gj)

    def component(self, i: int, lam: int) -> Expr:
        """``gamma^i_lambda`` with lambda = 0 for time and k + 1 for q^k."""
        return self.gamma0[i] if lam == 0 else self.gammaj[i][lam - 1]

    def components(self) -> tuple:
        return self.gamma0, self.gammaj


@dataclass(frozen=True)
class TangentConnection:
    """Symmetric linear connection on TQ from a quadratic equation.

    ``K_0^i_0 = f^i``, ``K_0^i_j = K_j^i_0 = b^i_j / 2``, ``K_k^i_j = a^i_kj``, ``K^0 = 0``.
    """

    cs: CoordSystem
    a: tuple   # a[i][j][k], symmetric in j, k
    b: tuple   # b[i][j]
    f: tuple   # f[i]

    def K(self, lam: int, i: int, nu: int) -> Expr:
        """Component ``K_lam^i_nu``; indices 0 = time, k + 1 = q^k; ``i`` is a fibre index."""
        if lam == 0 and nu == 0:
            return self.f[i]
        if lam == 0:
            return self.b[i][nu - 1] * HALF
        if nu == 0:
            return self.b[i][lam - 1] * HALF
        return self.a[i][lam - 1][nu - 1]

    def geodesic_rhs(self, qdot: Sequence) -> tuple:
        """Right side ``K_lam^i_nu qdot^lam qdot^nu`` for ``qdot = (qdot^0, qdot^1, ...)``."""
        n = self.cs.dim
        qdot = [Expr.coerce(v) for v in qdot]
        out = []
        for i in range(n):
            s = ZERO
            for lam in range(n + 1):
                for nu in range(n + 1):
                    k = self.K(lam, i, nu)
                    if k:
                        s = s + k * qdot[lam] * qdot[nu]
            out.append(s)
        return tuple(out)


@dataclass(frozen=True)
class CurvatureReport:
    R: tuple       # R[i][lam][mu], lam, mu in 0..n
    Rbar: tuple    # Rbar[i][j]
    Rtilde: Expr

    def verdict(self) -> Verdict:
        return all_zero(x for plane in self.R for row in plane for x in row)


# ---------------------------------------------------------------- operations

def _fibre(cs: CoordSystem, j: int) -> str:
    return cs.jet(j, 1)


def connection_from_equation(eq: SecondOrderEquation) -> DynamicConnection:
    cs = eq.cs
    n = cs.dim
    gj = tuple(tuple(x.diff(_fibre(cs, j)) * HALF for j in range(n)) for x in eq.xi)
    g0 = tuple(x - sum((cs.qt(j) * gj[i][j] for j in range(n)), ZERO)
               for i, x in enumerate(eq.xi))
    return DynamicConnection(cs, g0, gj)


def equation_from_connection(g: DynamicConnection) -> SecondOrderEquation:
    cs = g.cs
    n = cs.dim
    xi = tuple(g.gamma0[i] + sum((cs.qt(j) * g.gammaj[i][j] for j in range(n)), ZERO)
               for i in range(n))
    return SecondOrderEquation(cs, xi)


def torsion(g: DynamicConnection) -> tuple:
    """``T^k_i = gamma^k_i - d^t_i gamma^k_0 - q^j_t d^t_i gamma^k_j`` as rows k."""
    cs = g.cs
    n = cs.dim
    rows = []
    for k in range(n):
        row = []
        for i in range(n):
            v = _fibre(cs, i)
            s = g.gammaj[k][i] - g.gamma0[k].diff(v)
            for j in range(n):
                s = s - cs.qt(j) * g.gammaj[k][j].diff(v)
            row.append(s)
        rows.append(tuple(row))
    return tuple(rows)


def is_symmetric(g: DynamicConnection) -> Verdict:
    """Symmetry condition ``d^t_j gamma^i_0 + q^k_t d^t_j gamma^i_k = gamma^i_j``."""
    cs = g.cs
    n = cs.dim
    res = []
    for i in range(n):
        for j in range(n):
            v = _fibre(cs, j)
            s = g.gamma0[i].diff(v) - g.gammaj[i][j]
            for k in range(n):
                s = s + cs.qt(k) * g.gammaj[i][k].diff(v)
            res.append(s)
    return all_zero(res)


def curvature_report(g: DynamicConnection) -> CurvatureReport:
    """Curvature of the connection; nonlinear terms use fibre derivatives along q_t."""
    cs = g.cs
    n = cs.dim
    base = [cs.time] + [cs.jet(k, 0) for k in range(n)]
    fib = [_fibre(cs, j) for j in range(n)]
    comp = g.component

    def entry(i, lam, mu):
        s = comp(i, mu).diff(base[lam]) - comp(i, lam).diff(base[mu])
        for j in range(n):
            s = s + comp(j, lam) * comp(i, mu).diff(fib[j]) - comp(j, mu) * comp(i, lam).diff(fib[j])
        return s

    R = tuple(tuple(tuple(ZERO if lam == mu else entry(i, lam, mu) for mu in range(n + 1))
                    for lam in range(n + 1)) for i in range(n))
    Rbar = tuple(tuple(sum((R[i][k + 1][j + 1] * cs.qt(k) for k in range(n)), ZERO) + R[i][0][j + 1]
                       for j in range(n)) for i in range(n))
    Rtilde = sum((Rbar[i][i] for i in range(n)), ZERO)
    return CurvatureReport(R, Rbar, Rtilde)


def quadratic_split(eq: SecondOrderEquation) -> tuple:
    """Return ``(a, b, f)`` with ``xi^i = a^i_jk q^j_t q^k_t + b^i_j q^j_t + f^i``.

    Raises :class:`NotQuadratic` if ``xi`` is not quadratic in the velocities.
    """
    cs = eq.cs
    n = cs.dim
    fib = [_fibre(cs, j) for j in range(n)]
    at_rest = cs.velocity_zero()
    a, b, f = [], [], []
    for i, x in enumerate(eq.xi):
        grad = [x.diff(v) for v in fib]
        ai = tuple(tuple(grad[j].diff(fib[k]) * HALF for k in range(n)) for j in range(n))
        for row in ai:
            for c in row:
                if cs.jet_order(c) > 0:
                    raise NotQuadratic(f"component {i + 1} is not quadratic in the velocities: {x}")
        bi = tuple(g.subs(at_rest) for g in grad)
        fi = x.subs(at_rest)
        rebuilt = fi
        for j in range(n):
            rebuilt = rebuilt + bi[j] * cs.qt(j)
            for k in range(n):
                rebuilt = rebuilt + ai[j][k] * cs.qt(j) * cs.qt(k)
        if is_zero(x - rebuilt) is not Verdict.ZERO:
            raise NotQuadratic(f"component {i + 1} is not quadratic in the velocities: {x}")
        a.append(ai)
        b.append(bi)
        f.append(fi)
    return tuple(a), tuple(b), tuple(f)


def geodesic_connection(eq: SecondOrderEquation) -> TangentConnection:
    a, b, f = quadratic_split(eq)
    return TangentConnection(eq.cs, a, b, f)


def geodesic_check(eq: SecondOrderEquation, K: Optional[TangentConnection] = None) -> Verdict:
    """The geodesic equation at ``qdot^0 = 1, qdot^i = q^i_t`` reproduces ``xi``."""
    K = K or geodesic_connection(eq)
    cs = eq.cs
    rhs = K.geodesic_rhs([const(1)] + [cs.qt(i) for i in range(cs.dim)])
    return all_zero(r - x for r, x in zip(rhs, eq.xi))


__all__ = [
    "CurvatureReport", "DynamicConnection", "NotQuadratic", "SecondOrderEquation",
    "TangentConnection", "connection_from_equation", "curvature_report",
    "equation_from_connection", "geodesic_check", "geodesic_connection", "is_symmetric",
    "quadratic_split", "torsion",
]
