"""Partial and total derivatives, substitution."""
from __future__ import annotations

from typing import Mapping, Optional

from .coords import CoordSystem, JetOrderError
from .expr import Expr, ZERO

DEFAULT_JET_CAP = 3


def partial(e: Expr, name: str, cs: Optional[CoordSystem] = None) -> Expr:
    """Formal partial derivative with every other symbol held fixed."""
    if cs is not None:
        cs.check_symbol(name)
    return e.diff(name)


def substitute(e: Expr, bindings: Mapping[str, object]) -> Expr:
    """Simultaneous substitution of symbols by expressions or numbers."""
    return e.subs(bindings)


def total_derivative(e: Expr, cs: CoordSystem, cap: int = DEFAULT_JET_CAP) -> Expr:
    """``d_t = ∂_t + q_t ∂_q + q_tt ∂_{q_t} + ...`` over the fibre coordinates of ``cs``.

    Raises :class:`JetOrderError` when the result would contain a jet of order above ``cap``.
    """
    if cs.depends_on_momenta(e):
        raise ValueError("total derivative is defined on jets; momenta are not fibre coordinates here")
    out = e.diff(cs.time)
    for name in e.free_symbols:
        info = cs.info(name)
        if info is None or info.kind != "coord":
            continue
        if info.order + 1 > cap:
            raise JetOrderError(f"total derivative of {name} exceeds jet order {cap}")
        d = e.diff(name)
        if d:
            out = out + d * cs.q(info.index, info.order + 1)
    return out


def total_derivative_n(e: Expr, cs: CoordSystem, n: int, cap: int = DEFAULT_JET_CAP) -> Expr:
    for _ in range(n):
        e = total_derivative(e, cs, cap)
    return e


def gradient(e: Expr, names) -> list:
    return [e.diff(n) for n in names]


def is_velocity_free(e: Expr, cs: CoordSystem) -> bool:
    return cs.jet_order(e) == 0



__all__ = ["partial", "substitute", "total_derivative", "total_derivative_n", "gradient",
           "JetOrderError", "ZERO", "is_velocity_free"]
