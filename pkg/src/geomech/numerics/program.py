"""Compile canonical expressions into flat postfix programs over a column layout."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..symcore import Expr
from ..symcore.evaluate import UnboundSymbolError

# opcodes
CONST, LOAD, ADD, MUL, POWI, POWF, EXP, LOG, SIN, COS, OUT, STORE, RLOAD = range(13)
_FUNC_OP = {"exp": EXP, "log": LOG, "sin": SIN, "cos": COS}


@dataclass(frozen=True)
class Program:
    ops: np.ndarray       # int64
    args: np.ndarray      # int64
    consts: np.ndarray    # float64
    n_out: int
    n_reg: int
    stack_size: int
    columns: tuple        # names bound to x[0], x[1], ...

    def __len__(self) -> int:
        return len(self.ops)


class _Compiler:
    def __init__(self, columns: Sequence[str]):
        self.col = {c: i for i, c in enumerate(columns)}
        self.ops: list = []
        self.args: list = []
        self.consts: list = []
        self.const_idx: dict = {}
        self.counts: Counter = Counter()
        self.regs: dict = {}
        self.depth = 0
        self.max_depth = 0

    # occurrence counting for common subexpressions
    def count(self, e: Expr) -> None:
        for m in e._d:
            for a, k in m:
                self.counts[(a, k)] += 1
                if self.counts[(a, k)] == 1:
                    self.count_atom(a)

    def count_atom(self, a) -> None:
        self.counts[(a, None)] += 1
        if self.counts[(a, None)] > 1:
            return
        if a.kind == "sum":
            self.count(a.base)
        elif a.kind == "func":
            self.count(a.arg)

    def emit(self, op: int, arg: int = 0, delta: int = 0) -> None:
        self.ops.append(op)
        self.args.append(arg)
        self.depth += delta
        self.max_depth = max(self.max_depth, self.depth)

    def const(self, v: float) -> None:
        i = self.const_idx.get(v)
        if i is None:
            i = self.const_idx[v] = len(self.consts)
            self.consts.append(v)
        self.emit(CONST, i, 1)

    def expr(self, e: Expr) -> None:
        terms = e.sorted_terms()
        if not terms:
            self.const(0.0)
            return
        for n, (m, c) in enumerate(terms):
            first = True
            if c != 1 or not m:
                self.const(float(c))
                first = False
            for a, k in m:
                self.factor(a, k)
                if not first:
                    self.emit(MUL, 0, -1)
                first = False
            if n:
                self.emit(ADD, 0, -1)

    def cached(self, key, build) -> None:
        if key in self.regs:
            self.emit(RLOAD, self.regs[key], 1)
            return
        build()
        if self.counts[key] > 1:
            r = self.regs[key] = len(self.regs)
            self.emit(STORE, r, 0)

    def factor(self, a, k) -> None:
        if k == 1:
            self.atom(a)
            return

        def build():
            self.atom(a)
            if isinstance(k, int) or Fraction(k).denominator == 1:
                self.emit(POWI, int(k), 0)
            else:
                i = len(self.consts)
                self.consts.append(float(k))
                self.emit(POWF, i, 0)
        self.cached((a, k), build)

    def atom(self, a) -> None:
        if a.kind == "sym":
            try:
                self.emit(LOAD, self.col[a.name], 1)
            except KeyError:
                if a.name == "pi":
                    self.const(float(np.pi))
                else:
                    raise UnboundSymbolError(f"unbound symbol {a.name!r}") from None
            return
        if a.kind == "root":
            self.const(float(a.value))
            return

        def build():
            if a.kind == "sum":
                self.expr(a.base)
            else:
                self.expr(a.arg)
                self.emit(_FUNC_OP[a.name], 0, 0)
        self.cached((a, None), build)


def compile_exprs(exprs: Sequence[Expr], columns: Sequence[str]) -> Program:
    """Program writing ``exprs[k]`` evaluated at ``x`` into ``out[k]``."""
    c = _Compiler(columns)
    for e in exprs:
        c.count(e)
    for k, e in enumerate(exprs):
        c.expr(e)
        c.emit(OUT, k, -1)
    return Program(np.asarray(c.ops, dtype=np.int64), np.asarray(c.args, dtype=np.int64),
                   np.asarray(c.consts if c.consts else [0.0], dtype=np.float64),
                   len(exprs), max(len(c.regs), 1), max(c.max_depth, 1), tuple(columns))
