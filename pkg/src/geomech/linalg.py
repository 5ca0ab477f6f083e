"""Exact determinant and inverse of small symbolic matrices."""
from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from .symcore import Expr, Verdict, ZERO, is_zero, evaluate


class SingularMatrixError(ValueError):
    pass


def det(M: Sequence[Sequence[Expr]]) -> Expr:
    """Laplace expansion along rows with memoized minors."""
    n = len(M)

    @lru_cache(maxsize=None)
    def minor(row: int, cols: tuple) -> Expr:
        if row == n:
            return Expr.coerce(1)
        s = ZERO
        for pos, c in enumerate(cols):
            a = M[row][c]
            if not a:
                continue
            rest = cols[:pos] + cols[pos + 1:]
            term = a * minor(row + 1, rest)
            s = s - term if pos % 2 else s + term
        return s

    return minor(0, tuple(range(n)))


def adjugate(M: Sequence[Sequence[Expr]]) -> list:
    n = len(M)
    if n == 1:
        return [[Expr.coerce(1)]]
    adj = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            sub = [[M[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            cof = det(sub)
            adj[j][i] = -cof if (i + j) % 2 else cof
    return adj


def inverse(M: Sequence[Sequence[Expr]]) -> list:
    """Symbolic inverse; raises :class:`SingularMatrixError` when the determinant is zero."""
    d = det(M)
    if is_zero(d) is Verdict.ZERO:
        raise SingularMatrixError("matrix is singular (zero determinant)")
    inv_d = d ** -1
    return [[a * inv_d for a in row] for row in adjugate(M)]


def numeric(M: Sequence[Sequence[Expr]], point: dict) -> np.ndarray:
    return np.array([[evaluate(a, point) for a in row] for row in M], dtype=float)


def is_symmetric(M: Sequence[Sequence[Expr]]) -> bool:
    n = len(M)
    return all(M[i][j] == M[j][i] for i in range(n) for j in range(i + 1, n))


def matvec(M, v) -> list:
    return [sum((a * b for a, b in zip(row, v)), ZERO) for row in M]
