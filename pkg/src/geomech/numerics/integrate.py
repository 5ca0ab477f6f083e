"""Fixed-step RK4 integration of dynamic and Hamilton equations."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from ..symcore import CoordSystem, Expr
from ..symcore.evaluate import EvaluationError, UnboundSymbolError, evaluate
from . import kernels
from .program import Program, compile_exprs


class IntegrationError(RuntimeError):
    """Evaluation failed along the trajectory (domain error or overflow)."""

    def __init__(self, message: str, time: float, detail: str = ""):
        super().__init__(f"{message} at t = {time:.17g}" + (f" ({detail})" if detail else ""))
        self.time = time
        self.detail = detail


@dataclass(frozen=True)
class IntegratorConfig:
    h: float = 1e-3
    t0: float = 0.0
    t1: float = 1.0
    stride: int = 1
    method: str = "rk4"

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("step size must be positive")
        if not self.t1 > self.t0:
            raise ValueError("time span must be nonempty")
        if self.stride < 1:
            raise ValueError("output stride must be at least 1")
        if self.method.lower() != "rk4":
            raise ValueError(f"unsupported method {self.method!r}; only rk4 is available")

    def steps(self) -> tuple:
        """Number of steps and the step actually used so that the span is covered exactly."""
        span = self.t1 - self.t0
        n = round(span / self.h)
        if n < 1 or abs(n * self.h - span) > 1e-9 * span:
            n = math.ceil(span / self.h)
        return n, span / n


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray           # rows (q, q_t) or (q, p)
    columns: tuple               # names of the state columns
    kind: str                    # "dynamic" or "hamilton"
    h: float
    method: str = "rk4"
    params: dict = field(default_factory=dict)
    time_name: str = "t"

    @property
    def n(self) -> int:
        return self.states.shape[1] // 2

    def column(self, name: str) -> np.ndarray:
        if name == self.time_name:
            return self.times
        return self.states[:, self.columns.index(name)]

    def row_point(self, k: int) -> dict:
        pt = dict(self.params)
        pt[self.time_name] = float(self.times[k])
        pt.update({c: float(v) for c, v in zip(self.columns, self.states[k])})
        return pt

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow((self.time_name,) + self.columns)
            for t, row in zip(self.times, self.states):
                w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])


@dataclass
class DriftStats:
    initial: float
    max_abs: float
    max_rel: float
    samples: int

    def as_dict(self) -> dict:
        return {"initial": self.initial, "max_abs_drift": self.max_abs,
                "max_rel_drift": self.max_rel, "samples": self.samples}


REL_FLOOR = 1e-12


def _param_values(cs: CoordSystem, params: Optional[Mapping], needed) -> dict:
    vals = dict(cs.param_values)
    if params:
        vals.update({k: float(v) for k, v in params.items()})
    missing = sorted(n for n in needed if n not in vals)
    if missing:
        raise UnboundSymbolError(f"parameters without values: {', '.join(missing)}")
    return vals


def _run(exprs: Sequence[Expr], state_cols: Sequence[str], cs: CoordSystem, y0, cfg: IntegratorConfig,
         params: Optional[Mapping], kind: str, jit: Optional[bool]) -> Trajectory:
    free = set()
    for e in exprs:
        free |= e.free_symbols
    allowed = {cs.time, *state_cols}
    pnames = sorted(n for n in free - allowed if n != "pi")
    unknown = [n for n in pnames if cs.info(n) is None or cs.info(n).kind != "param"]
    if unknown:
        raise UnboundSymbolError(f"symbols not available during integration: {', '.join(unknown)}")
    vals = _param_values(cs, params, pnames)
    columns = [cs.time, *state_cols, *pnames]
    prog = compile_exprs(exprs, columns)
    y0 = np.asarray(y0, dtype=np.float64)
    if y0.shape != (len(state_cols),) or not np.all(np.isfinite(y0)):
        raise ValueError(f"initial state must be {len(state_cols)} finite numbers")
    nsteps, h = cfg.steps()
    k = kernels.get_kernels(jit)
    pvec = np.array([vals[n] for n in pnames], dtype=np.float64)
    times, states, bad = k["rk4"](prog.ops, prog.args, prog.consts, prog.n_reg, prog.stack_size,
                                  y0, float(cfg.t0), float(h), int(nsteps), int(cfg.stride), pvec)
    used = {n: vals[n] for n in pnames}
    if bad >= 0:
        t_fail = cfg.t0 + bad * h
        raise IntegrationError("evaluation failed", t_fail,
                               _diagnose(exprs, state_cols, cs, states, times, h, t_fail, used))
    return Trajectory(np.array(times), np.array(states), tuple(state_cols), kind, h, "rk4", used, cs.time)


def _diagnose(exprs, state_cols, cs, states, times, h, t_fail, params) -> str:
    """Replay the failing step with tree evaluation and name the first offending subexpression."""
    if len(states) == 0:
        return ""

    def rhs(t, y):
        pt = dict(params)
        pt[cs.time] = t
        pt.update(zip(state_cols, (float(v) for v in y)))
        out = np.array([evaluate(e, pt) for e in exprs], dtype=np.float64)
        if not np.all(np.isfinite(out)):
            raise OverflowError("non-finite value")
        return out

    t, y = float(times[-1]), np.array(states[-1], dtype=np.float64)
    try:
        # the last stored row can lie up to one output stride before the failing step
        for _ in range(max(0, round((t_fail - t) / h))):
            k1 = rhs(t, y)
            k2 = rhs(t + h / 2, y + h / 2 * k1)
            k3 = rhs(t + h / 2, y + h / 2 * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        rhs(t + h, y + h * k3)
    except EvaluationError as exc:
        return str(exc)
    except (OverflowError, ZeroDivisionError, ValueError) as exc:
        return f"{exc} in a Runge-Kutta stage"
    return "non-finite value in a Runge-Kutta stage"


def integrate_dynamic(eq, q0, v0, cfg: IntegratorConfig, params: Optional[Mapping] = None,
                      jit: Optional[bool] = None) -> Trajectory:
    """RK4 for the first-order reduction ``q' = v, v' = xi(t, q, v)``."""
    cs = eq.cs
    n = cs.dim
    qcols = [cs.jet(i, 0) for i in range(n)]
    vcols = [cs.jet(i, 1) for i in range(n)]
    rhs = [cs.qt(i) for i in range(n)] + list(eq.xi)
    return _run(rhs, qcols + vcols, cs, list(q0) + list(v0), cfg, params, "dynamic", jit)


def integrate_hamilton(H, q0, p0, cfg: IntegratorConfig, params: Optional[Mapping] = None,
                       jit: Optional[bool] = None) -> Trajectory:
    """RK4 for ``q_t = d^p H, p_t = -d_q H``."""
    from ..hamiltonian import hamilton_equations
    cs = H.cs
    n = cs.dim
    dq, dp = hamilton_equations(H)
    cols = [cs.jet(i, 0) for i in range(n)] + list(cs.momenta)
    return _run(list(dq) + list(dp), cols, cs, list(q0) + list(p0), cfg, params, "hamilton", jit)


def evaluate_along(exprs: Sequence[Expr], traj: Trajectory, params: Optional[Mapping] = None,
                   jit: Optional[bool] = None) -> np.ndarray:
    """Values of ``exprs`` at every sample, shape (samples, len(exprs))."""
    vals = dict(traj.params)
    if params:
        vals.update({k: float(v) for k, v in params.items()})
    free = set()
    for e in exprs:
        free |= e.free_symbols
    known = {traj.time_name, *traj.columns}
    pnames = sorted(n for n in free - known if n != "pi")
    missing = [n for n in pnames if n not in vals]
    if missing:
        raise UnboundSymbolError(f"unbound symbol(s) {', '.join(repr(m) for m in missing)}")
    columns = [traj.time_name, *traj.columns, *pnames]
    prog: Program = compile_exprs(list(exprs), columns)
    X = np.empty((len(traj.times), len(columns)))
    X[:, 0] = traj.times
    X[:, 1:1 + len(traj.columns)] = traj.states
    for k, nme in enumerate(pnames):
        X[:, 1 + len(traj.columns) + k] = vals[nme]
    res, bad = kernels.get_kernels(jit)["eval_rows"](prog.ops, prog.args, prog.consts, prog.n_reg,
                                                     prog.stack_size, X, prog.n_out)
    if bad >= 0:
        raise EvaluationError(f"evaluation failed at t = {traj.times[bad]:.17g}")
    return res


def conservation_drift(expr: Expr, traj: Trajectory, params: Optional[Mapping] = None,
                       jit: Optional[bool] = None) -> DriftStats:
    """Drift of ``expr`` along the samples.

    The relative drift divides by ``|F(0)|``; when ``|F(0)|`` is below 1e-12 the
    absolute drift is reported in its place.
    """
    v = evaluate_along([expr], traj, params, jit)[:, 0]
    f0 = float(v[0])
    dev = float(np.max(np.abs(v - f0)))
    scale = abs(f0) if abs(f0) > REL_FLOOR else 1.0
    return DriftStats(f0, dev, dev / scale, len(v))
