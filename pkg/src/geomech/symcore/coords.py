"""Coordinate systems: time, fibre coordinates, their jets, momenta and parameters."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .expr import Expr, sym

JET_SUFFIX = "_t"
MAX_NAMED_ORDER = 4
RESERVED = frozenset({"pi", "exp", "log", "sin", "cos", "sqrt"})


class JetOrderError(ValueError):
    """Raised when a total derivative would exceed the supported jet order."""


def jet_name(base: str, order: int) -> str:
    if order == 0:
        return base
    return base + "_" + "t" * order


@dataclass(frozen=True)
class SymbolInfo:
    kind: str          # "time", "coord", "momentum", "param", "const"
    index: int = -1    # position among fibre coordinates or momenta
    order: int = 0     # jet order for fibre coordinates


@dataclass(frozen=True)
class CoordSystem:
    """Adapted coordinates ``(t, q^i, q^i_t, ...)`` plus momenta and parameters.

    ``coords`` are the fibre coordinates; jet names are derived by appending
    ``_t``, ``_tt``, ...  ``params`` maps parameter names to an optional value.
    """

    coords: tuple
    momenta: tuple = ()
    params: tuple = ()          # tuple of (name, value or None)
    time: str = "t"
    _table: dict = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        coords = tuple(self.coords)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "momenta", tuple(self.momenta))
        params = self.params
        if isinstance(params, Mapping):
            params = tuple(params.items())
        params = tuple((str(n), None if v is None else float(v)) for n, v in
                       ((p, None) if isinstance(p, str) else p for p in params))
        object.__setattr__(self, "params", params)
        if not coords:
            raise ValueError("a coordinate system needs at least one fibre coordinate")
        table: dict = {self.time: SymbolInfo("time")}
        for i, q in enumerate(coords):
            for k in range(MAX_NAMED_ORDER + 1):
                self._claim(table, jet_name(q, k), SymbolInfo("coord", i, k))
        for i, p in enumerate(self.momenta):
            self._claim(table, p, SymbolInfo("momentum", i))
        for n, _ in params:
            self._claim(table, n, SymbolInfo("param"))
        table["pi"] = SymbolInfo("const")
        object.__setattr__(self, "_table", table)

    @staticmethod
    def _claim(table: dict, name: str, info: SymbolInfo) -> None:
        if name in table or name in RESERVED:
            raise ValueError(f"duplicate or reserved coordinate name {name!r}")
        table[name] = info

    # constructors
    @classmethod
    def standard(cls, n: int, params: Iterable | Mapping = (), momenta: bool = True) -> "CoordSystem":
        if n < 1:
            raise ValueError("dimension must be at least 1")
        coords = tuple(f"q{i + 1}" for i in range(n))
        moms = tuple(f"p{i + 1}" for i in range(n)) if momenta else ()
        return cls(coords, moms, params)

    def extended(self, extra_coords: Iterable[str] = (), momenta: Optional[Iterable[str]] = None,
                 extra_params: Iterable = ()) -> "CoordSystem":
        moms = self.momenta if momenta is None else tuple(momenta)
        return CoordSystem(self.coords + tuple(extra_coords), moms,
                           self.params + tuple(extra_params), self.time)

    # queries
    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def param_names(self) -> tuple:
        return tuple(n for n, _ in self.params)

    @property
    def param_values(self) -> dict:
        return {n: v for n, v in self.params if v is not None}

    def info(self, name: str) -> Optional[SymbolInfo]:
        return self._table.get(name)

    def has(self, name: str) -> bool:
        return name in self._table

    def check_symbol(self, name: str) -> None:
        if name not in self._table:
            raise KeyError(f"unknown symbol {name!r}")

    def jet(self, i: int, order: int) -> str:
        return jet_name(self.coords[i], order)

    # expression handles
    @property
    def t(self) -> Expr:
        return sym(self.time)

    def q(self, i: int, order: int = 0) -> Expr:
        return sym(self.jet(i, order))

    def qt(self, i: int) -> Expr:
        return self.q(i, 1)

    def qtt(self, i: int) -> Expr:
        return self.q(i, 2)

    def p(self, i: int) -> Expr:
        return sym(self.momenta[i])

    def param(self, name: str) -> Expr:
        if self.info(name) is None or self.info(name).kind != "param":
            raise KeyError(f"unknown parameter {name!r}")
        return sym(name)

    def jet_order(self, e: Expr) -> int:
        """Highest jet order of a fibre coordinate appearing in ``e``."""
        best = 0
        for n in e.free_symbols:
            info = self._table.get(n)
            if info is not None and info.kind == "coord":
                best = max(best, info.order)
        return best

    def depends_on_momenta(self, e: Expr) -> bool:
        return any((i := self._table.get(n)) is not None and i.kind == "momentum"
                   for n in e.free_symbols)

    def velocity_zero(self) -> dict:
        return {self.jet(i, 1): 0 for i in range(self.dim)}
