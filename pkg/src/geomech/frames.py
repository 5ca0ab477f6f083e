"""Reference frames, coordinate changes, relative acceleration."""
from __future__ import annotations

from dataclasses import dataclass

from .dynamics import (DynamicConnection, SecondOrderEquation, _exprs, connection_from_equation,
                       quadratic_split)
from .symcore import CoordSystem, Verdict, ZERO, all_zero, total_derivative


class InversionError(ValueError):
    """The supplied inverse map does not invert the forward map."""


@dataclass(frozen=True)
class ReferenceFrame:
    """Observer field ``Gamma = d_t + Gamma^i d_i`` with components depending on (t, q)."""

    cs: CoordSystem
    Gamma: tuple

    def __post_init__(self):
        g = _exprs(self.cs, self.Gamma)
        if len(g) != self.cs.dim:
            raise ValueError(f"expected {self.cs.dim} frame components")
        for x in g:
            if self.cs.jet_order(x) > 0:
                raise ValueError(f"frame components depend on (t, q) only: {x}")
        object.__setattr__(self, "Gamma", g)

    @classmethod
    def rest(cls, cs: CoordSystem) -> "ReferenceFrame":
        return cls(cs, (ZERO,) * cs.dim)

    def on_frame(self) -> dict:
        """Bindings ``q^i_t -> Gamma^i``."""
        return {self.cs.jet(i, 1): g for i, g in enumerate(self.Gamma)}


@dataclass(frozen=True)
class CoordinateChange:
    """``forward``: new coordinates as functions of (t, old q);
    ``inverse``: old coordinates as functions of (t, new q).

    Both maps are written with the coordinate names of ``cs``; which system a
    name refers to is fixed by the role of the map.
    """

    cs: CoordSystem
    forward: tuple
    inverse: tuple

    def __post_init__(self):
        fw = _exprs(self.cs, self.forward)
        inv = _exprs(self.cs, self.inverse)
        n = self.cs.dim
        if len(fw) != n or len(inv) != n:
            raise ValueError("coordinate change needs n forward and n inverse components")
        for x in fw + inv:
            if self.cs.jet_order(x) > 0:
                raise ValueError(f"coordinate changes depend on (t, q) only: {x}")
        object.__setattr__(self, "forward", fw)
        object.__setattr__(self, "inverse", inv)

    def _inverse_bindings(self) -> dict:
        return {self.cs.jet(i, 0): g for i, g in enumerate(self.inverse)}

    def check_inverse(self) -> Verdict:
        """forward(t, inverse(t, q)) = q."""
        b = self._inverse_bindings()
        return all_zero(f.subs(b) - self.cs.q(i) for i, f in enumerate(self.forward))

    def pullback_bindings(self) -> dict:
        """Old q and q_t in terms of the new coordinates and velocities."""
        cs = self.cs
        b = self._inverse_bindings()
        for i, g in enumerate(self.inverse):
            b[cs.jet(i, 1)] = total_derivative(g, cs)
        return b

    def compose(self, other: "CoordinateChange") -> "CoordinateChange":
        """Apply ``self`` first, then ``other``."""
        cs = self.cs
        fwd_b = {cs.jet(i, 0): f for i, f in enumerate(self.forward)}
        inv_b = {cs.jet(i, 0): g for i, g in enumerate(other.inverse)}
        fw = tuple(f.subs(fwd_b) for f in other.forward)
        inv = tuple(g.subs(inv_b) for g in self.inverse)
        return CoordinateChange(cs, fw, inv)


@dataclass(frozen=True)
class FrameConnection:
    connection: DynamicConnection
    frame: ReferenceFrame


@dataclass(frozen=True)
class CoriolisDecomposition:
    frame_term: tuple       # -(nabla_0 Gamma + Gamma^j nabla_j Gamma)
    coriolis_term: tuple    # -2 (q_t - Gamma)^j nabla_j Gamma

    @property
    def total(self) -> tuple:
        return tuple(a + b for a, b in zip(self.frame_term, self.coriolis_term))


def relative_velocity(fr: ReferenceFrame) -> tuple:
    cs = fr.cs
    return tuple(cs.qt(i) - g for i, g in enumerate(fr.Gamma))


def transform_equation(eq: SecondOrderEquation, ch: CoordinateChange,
                       check: bool = True) -> SecondOrderEquation:
    """Transport ``q_tt = xi`` through the change and express it in the new coordinates."""
    cs = eq.cs
    if check and ch.check_inverse() is Verdict.NONZERO:
        raise InversionError("inverse map does not invert the forward map")
    n = cs.dim
    q = [cs.jet(j, 0) for j in range(n)]
    v = [cs.qt(j) for j in range(n)]
    out = []
    for F in ch.forward:
        dF = [F.diff(x) for x in q]
        dtF = F.diff(cs.time)
        s = dtF.diff(cs.time)
        for j in range(n):
            s = s + eq.xi[j] * dF[j] + 2 * v[j] * dF[j].diff(cs.time)
            for k in range(n):
                s = s + v[j] * v[k] * dF[j].diff(q[k])
        out.append(s)
    b = ch.pullback_bindings()
    return SecondOrderEquation(cs, tuple(x.subs(b) for x in out))


def free_motion_equation(ch: CoordinateChange) -> SecondOrderEquation:
    """The equation ``q_tt = 0`` of the old coordinates written in the new ones."""
    return transform_equation(SecondOrderEquation.free(ch.cs), ch)


def frame_in_coordinates(fr: ReferenceFrame, ch: CoordinateChange) -> tuple:
    """Frame components in the new coordinates; all zero when the change is adapted."""
    cs = fr.cs
    out = []
    for F in ch.forward:
        s = F.diff(cs.time)
        for j, g in enumerate(fr.Gamma):
            s = s + g * F.diff(cs.jet(j, 0))
        out.append(s.subs(ch._inverse_bindings()))
    return tuple(out)


def frame_connection(g: DynamicConnection, fr: ReferenceFrame) -> FrameConnection:
    cs = g.cs
    n = cs.dim
    on = fr.on_frame()
    G = fr.Gamma
    gj = []
    for i in range(n):
        gj.append(tuple(g.gammaj[i][k] + G[i].diff(cs.jet(k, 0)) - g.gammaj[i][k].subs(on)
                        for k in range(n)))
    g0 = []
    for i in range(n):
        s = total_derivative(G[i], cs)
        for k in range(n):
            s = s - g.gammaj[i][k] * G[k] - G[k] * (G[i].diff(cs.jet(k, 0)) - g.gammaj[i][k].subs(on))
        g0.append(s)
    return FrameConnection(DynamicConnection(cs, tuple(g0), tuple(gj)), fr)


def relative_acceleration(eq: SecondOrderEquation, fr: ReferenceFrame) -> tuple:
    """``a_Gamma = xi - xi_Gamma`` with the frame equation ``xi_Gamma``."""
    cs = eq.cs
    n = cs.dim
    g = connection_from_equation(eq)
    on = fr.on_frame()
    G = fr.Gamma
    rel = relative_velocity(fr)
    out = []
    for i in range(n):
        xg = total_derivative(G[i], cs)
        for k in range(n):
            c = G[i].diff(cs.jet(k, 0)) + g.gammaj[i][k] - g.gammaj[i][k].subs(on)
            xg = xg + c * rel[k]
        out.append(eq.xi[i] - xg)
    return tuple(out)


def coriolis_decomposition(eq: SecondOrderEquation, fr: ReferenceFrame) -> CoriolisDecomposition:
    """Split the relative acceleration of a quadratic equation into frame and Coriolis parts."""
    quadratic_split(eq)
    cs = eq.cs
    n = cs.dim
    g = connection_from_equation(eq)
    on = fr.on_frame()
    G = fr.Gamma
    rel = relative_velocity(fr)
    nab0 = [G[k].diff(cs.time) - g.gamma0[k].subs(on) for k in range(n)]
    nab = [[G[k].diff(cs.jet(j, 0)) - g.gammaj[k][j].subs(on) for j in range(n)] for k in range(n)]
    frame_term = []
    cor = []
    for i in range(n):
        frame_term.append(-(nab0[i] + sum((G[j] * nab[i][j] for j in range(n)), ZERO)))
        cor.append(-2 * sum((rel[j] * nab[i][j] for j in range(n)), ZERO))
    return CoriolisDecomposition(tuple(frame_term), tuple(cor))


def geodesic_residual(eq: SecondOrderEquation, fr: ReferenceFrame) -> tuple:
    """``d_t Gamma^i + Gamma^j d_j Gamma^i - xi^i(t, q, Gamma)``."""
    cs = eq.cs
    G = fr.Gamma
    on = fr.on_frame()
    out = []
    for i in range(cs.dim):
        s = G[i].diff(cs.time) - eq.xi[i].subs(on)
        for j in range(cs.dim):
            s = s + G[j] * G[i].diff(cs.jet(j, 0))
        out.append(s)
    return tuple(out)


def is_geodesic_frame(eq: SecondOrderEquation, fr: ReferenceFrame) -> Verdict:
    return all_zero(geodesic_residual(eq, fr))


__all__ = [
    "CoordinateChange", "CoriolisDecomposition", "FrameConnection", "InversionError",
    "ReferenceFrame", "coriolis_decomposition", "frame_connection", "frame_in_coordinates",
    "free_motion_equation", "geodesic_residual", "is_geodesic_frame", "relative_acceleration",
    "relative_velocity", "transform_equation",
]
