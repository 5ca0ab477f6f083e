"""Program interpreter and RK4 stepper.

The kernels are plain numpy code.  When numba is importable and the
``GEOMECH_NO_JIT`` environment variable is unset (or "0"), they are compiled
with ``numba.njit``.  Otherwise the RK4 stepper runs as ordinary Python and
row evaluation switches to a column-vectorized numpy interpreter.
"""
from __future__ import annotations

import math
import os
import types

import numpy as np

try:  # numba is optional
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None


def jit_requested() -> bool:
    return os.environ.get("GEOMECH_NO_JIT", "0").strip().lower() in ("", "0", "false", "no")


def jit_available() -> bool:
    return numba is not None


# opcodes, kept in sync with program.py
CONST, LOAD, ADD, MUL, POWI, POWF, EXP, LOG, SIN, COS, OUT, STORE, RLOAD = range(13)


def run_program(ops, args, consts, x, stack, regs, out):
    """Evaluate a program at ``x``; returns False on a domain error or non-finite value."""
    sp = 0
    ok = True
    for pc in range(ops.shape[0]):
        op = ops[pc]
        a = args[pc]
        if op == CONST:
            stack[sp] = consts[a]
            sp += 1
        elif op == LOAD:
            stack[sp] = x[a]
            sp += 1
        elif op == ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == POWI:
            b = stack[sp - 1]
            if b == 0.0 and a < 0:
                ok = False
                stack[sp - 1] = math.nan
            else:
                r = 1.0
                base = b if a >= 0 else 1.0 / b
                n = a if a >= 0 else -a
                while n > 0:
                    if n & 1:
                        r *= base
                    base *= base
                    n >>= 1
                stack[sp - 1] = r
        elif op == POWF:
            b = stack[sp - 1]
            if b < 0.0 or (b == 0.0 and consts[a] < 0.0):
                ok = False
                stack[sp - 1] = math.nan
            else:
                stack[sp - 1] = b ** consts[a]
        elif op == EXP:
            stack[sp - 1] = math.exp(stack[sp - 1])
        elif op == LOG:
            b = stack[sp - 1]
            if b <= 0.0:
                ok = False
                stack[sp - 1] = math.nan
            else:
                stack[sp - 1] = math.log(b)
        elif op == SIN:
            stack[sp - 1] = math.sin(stack[sp - 1])
        elif op == COS:
            stack[sp - 1] = math.cos(stack[sp - 1])
        elif op == OUT:
            sp -= 1
            v = stack[sp]
            if not math.isfinite(v):
                ok = False
            out[a] = v
        elif op == STORE:
            regs[a] = stack[sp - 1]
        elif op == RLOAD:
            stack[sp] = regs[a]
            sp += 1
    return ok


def eval_rows(ops, args, consts, n_reg, stack_size, X, n_out):
    """Evaluate a program on every row of ``X``; returns (values, first bad row or -1)."""
    rows = X.shape[0]
    res = np.empty((rows, n_out))
    stack = np.empty(stack_size)
    regs = np.empty(n_reg)
    out = np.empty(n_out)
    bad = -1
    for r in range(rows):
        ok = run_program(ops, args, consts, X[r], stack, regs, out)
        for k in range(n_out):
            res[r, k] = out[k]
        if not ok and bad < 0:
            bad = r
    return res, bad


def rk4(ops, args, consts, n_reg, stack_size, y0, t0, h, nsteps, stride, params):
    """Classical RK4 for ``y' = F(t, y)`` with F given by a program over [t, y, params].

    Returns (times, states, failing step or -1).  Rows are stored every ``stride``
    steps and after the last step.
    """
    m = y0.shape[0]
    npar = params.shape[0]
    nout = nsteps // stride + 1
    if nsteps % stride != 0:
        nout += 1
    times = np.empty(nout)
    states = np.empty((nout, m))
    x = np.empty(1 + m + npar)
    for k in range(npar):
        x[1 + m + k] = params[k]
    stack = np.empty(stack_size)
    regs = np.empty(n_reg)
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    y = y0.copy()
    times[0] = t0
    for j in range(m):
        states[0, j] = y[j]
    row = 1
    for step in range(nsteps):
        t = t0 + step * h
        x[0] = t
        for j in range(m):
            x[1 + j] = y[j]
        ok = run_program(ops, args, consts, x, stack, regs, k1)
        x[0] = t + 0.5 * h
        for j in range(m):
            x[1 + j] = y[j] + 0.5 * h * k1[j]
        ok = run_program(ops, args, consts, x, stack, regs, k2) and ok
        for j in range(m):
            x[1 + j] = y[j] + 0.5 * h * k2[j]
        ok = run_program(ops, args, consts, x, stack, regs, k3) and ok
        x[0] = t + h
        for j in range(m):
            x[1 + j] = y[j] + h * k3[j]
        ok = run_program(ops, args, consts, x, stack, regs, k4) and ok
        if not ok:
            return times[:row], states[:row], step
        for j in range(m):
            y[j] = y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        done = step + 1
        if done % stride == 0 or done == nsteps:
            times[row] = t0 + done * h
            for j in range(m):
                states[row, j] = y[j]
            row += 1
    return times[:row], states[:row], -1


def eval_rows_vectorized(ops, args, consts, n_reg, stack_size, X, n_out):
    """Fallback for :func:`eval_rows` that runs the program once on whole columns."""
    rows = X.shape[0]
    stack = [None] * stack_size
    regs = [None] * n_reg
    res = np.empty((rows, n_out))
    sp = 0
    with np.errstate(all="ignore"):
        for op, a in zip(ops.tolist(), args.tolist()):
            if op == CONST:
                stack[sp] = np.full(rows, consts[a])
                sp += 1
            elif op == LOAD:
                stack[sp] = X[:, a]
                sp += 1
            elif op == ADD:
                sp -= 1
                stack[sp - 1] = stack[sp - 1] + stack[sp]
            elif op == MUL:
                sp -= 1
                stack[sp - 1] = stack[sp - 1] * stack[sp]
            elif op == POWI:
                stack[sp - 1] = np.power(stack[sp - 1], float(a))
            elif op == POWF:
                b = stack[sp - 1]
                stack[sp - 1] = np.where(b < 0.0, np.nan, np.power(np.abs(b), consts[a]))
            elif op == EXP:
                stack[sp - 1] = np.exp(stack[sp - 1])
            elif op == LOG:
                b = stack[sp - 1]
                stack[sp - 1] = np.where(b > 0.0, np.log(np.abs(b)), np.nan)
            elif op == SIN:
                stack[sp - 1] = np.sin(stack[sp - 1])
            elif op == COS:
                stack[sp - 1] = np.cos(stack[sp - 1])
            elif op == OUT:
                sp -= 1
                res[:, a] = stack[sp]
            elif op == STORE:
                regs[a] = stack[sp - 1]
            elif op == RLOAD:
                stack[sp] = regs[a]
                sp += 1
    bad_rows = np.flatnonzero(~np.all(np.isfinite(res), axis=1))
    return res, int(bad_rows[0]) if bad_rows.size else -1


_py = {"run_program": run_program, "eval_rows": eval_rows_vectorized, "rk4": rk4,
       "eval_rows_scalar": eval_rows}
_compiled: dict = {}


def get_kernels(jit: bool | None = None) -> dict:
    """Kernel table; ``jit=None`` follows the environment flag."""
    if jit is None:
        jit = jit_requested()
    if not jit or numba is None:
        return _py
    if not _compiled:
        deco = numba.njit(cache=True, nogil=True)
        rp = deco(run_program)
        # the callers must see the compiled helper, not the Python one
        _compiled.update(run_program=rp, eval_rows=deco(_rebind(eval_rows, rp)),
                         rk4=deco(_rebind(rk4, rp)))
    return _compiled


def _rebind(fn, helper):
    glb = dict(fn.__globals__)
    glb["run_program"] = helper
    return types.FunctionType(fn.__code__, glb, fn.__name__, fn.__defaults__, fn.__closure__)


def using_jit() -> bool:
    return jit_requested() and numba is not None
