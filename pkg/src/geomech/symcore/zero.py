"""Zero testing: exact on the rational fragment, sampled otherwise."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .evaluate import EvaluationError, evaluate
from .expr import Expr, _monomial_factor

SAMPLES = 16
TOL = 1e-9
_state = {"seed": 0}


def set_default_seed(seed: int) -> None:
    """Seed used by every zero test that is not given one explicitly."""
    _state["seed"] = int(seed)


def default_seed() -> int:
    return _state["seed"]


class Verdict(str, enum.Enum):
    ZERO = "Zero"
    NONZERO = "NonZero"
    UNKNOWN = "Unknown"

    def __str__(self) -> str:
        return self.value


@dataclass
class ZeroTest:
    verdict: Verdict
    exact: bool                      # decided symbolically
    samples: int = 0
    max_abs: float = 0.0
    witness: Optional[dict] = field(default=None)

    @property
    def probable_zero(self) -> bool:
        return self.verdict is Verdict.UNKNOWN


def clear_denominators(e: Expr) -> Expr:
    """Multiply by the smallest power of every atom that appears with a negative exponent."""
    lows: dict = {}
    for m in e._d:
        for a, k in m:
            if k < 0 and a.kind != "root":
                lows[a] = min(lows.get(a, 0), k)
    for a, k in sorted(lows.items(), key=lambda ak: ak[0].key):
        e = e * _monomial_factor(a, math.ceil(-k))
    return e


def _sample_point(rng: np.random.Generator, names: list) -> dict:
    mags = rng.uniform(0.1, 2.0, size=len(names))
    signs = rng.choice((-1.0, 1.0), size=len(names))
    return {n: float(v) for n, v in zip(names, mags * signs)}


def zero_test(e: Expr, seed: Optional[int] = None, samples: int = SAMPLES,
              tol: float = TOL) -> ZeroTest:
    if e.is_zero_form:
        return ZeroTest(Verdict.ZERO, True)
    if e.is_constant:
        return ZeroTest(Verdict.NONZERO, True, max_abs=abs(float(e.as_rational())))
    if clear_denominators(e).is_zero_form:
        return ZeroTest(Verdict.ZERO, True)
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    names = sorted(n for n in e.free_symbols if n != "pi")
    done = 0
    attempts = 0
    worst = 0.0
    while done < samples and attempts < 10 * samples:
        attempts += 1
        pt = _sample_point(rng, names)
        try:
            v = evaluate(e, pt)
        except (EvaluationError, OverflowError, ZeroDivisionError):
            continue
        done += 1
        if abs(v) > tol:
            return ZeroTest(Verdict.NONZERO, False, done, abs(v), pt)
        worst = max(worst, abs(v))
    return ZeroTest(Verdict.UNKNOWN, False, done, worst)


def is_zero(e: Expr, seed: Optional[int] = None) -> Verdict:
    return zero_test(e, seed).verdict


def combine(verdicts: Iterable[Verdict]) -> Verdict:
    """Zero when all are Zero, NonZero when any is NonZero, else Unknown."""
    vs = list(verdicts)
    if any(v is Verdict.NONZERO for v in vs):
        return Verdict.NONZERO
    if all(v is Verdict.ZERO for v in vs):
        return Verdict.ZERO
    return Verdict.UNKNOWN


def all_zero(exprs: Iterable[Expr], seed: Optional[int] = None) -> Verdict:
    return combine(is_zero(e, seed) for e in exprs)
