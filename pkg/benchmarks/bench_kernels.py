"""Compare the numba-compiled kernels with the pure Python/numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--period-count K]

Both paths run the same RK4 integration of the Kepler problem and the same
row-wise evaluation of the Runge-Lenz component; the script reports wall-clock
times and the largest difference between the two results.
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from geomech.lagrangian import Lagrangian, energy_function, lagrangian_connection
from geomech.numerics import IntegratorConfig, evaluate_along, integrate_dynamic, jit_available
from geomech.symcore import CoordSystem, parse

KEPLER_L = "1/2*(q1_t^2 + q2_t^2 + q3_t^2) + 1/(q1^2 + q2^2 + q3^2)^(1/2)"
RUNGE_LENZ = ("(q1*q2_t - q2*q1_t)*q2_t + (q1*q3_t - q3*q1_t)*q3_t"
              " - q1/(q1^2 + q2^2 + q3^2)^(1/2)")


def best_of(fn, repeat: int):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--period-count", type=int, default=1)
    args = ap.parse_args()

    cs = CoordSystem.standard(3)
    L = Lagrangian(cs, KEPLER_L)
    eq = lagrangian_connection(L)
    cfg = IntegratorConfig(h=1e-3, t1=2 * math.pi * args.period_count)
    exprs = [energy_function(L), parse(RUNGE_LENZ, cs)]

    paths = [False] + ([True] if jit_available() else [])
    results = {}
    for jit in paths:
        # one untimed call so that compilation (or the on-disk cache load) is excluded
        integrate_dynamic(eq, [1, 0, 0], [0, 1, 0], IntegratorConfig(h=0.1, t1=0.2), jit=jit)
        t_rk4, traj = best_of(lambda: integrate_dynamic(eq, [1, 0, 0], [0, 1, 0], cfg, jit=jit),
                              args.repeat)
        t_eval, vals = best_of(lambda: evaluate_along(exprs, traj, jit=jit), args.repeat)
        results[jit] = (t_rk4, t_eval, traj, vals)
        label = "numba" if jit else "fallback"
        print(f"{label:>8}: rk4 {len(traj.times) - 1} steps {t_rk4 * 1e3:9.2f} ms   "
              f"eval {vals.shape[0]} rows {t_eval * 1e3:9.2f} ms")

    if len(results) == 2:
        py, nb = results[False], results[True]
        dstate = float(np.max(np.abs(py[2].states - nb[2].states)))
        dvals = float(np.max(np.abs(py[3] - nb[3])))
        print(f"speedup: rk4 {py[0] / nb[0]:.1f}x, eval {py[1] / nb[1]:.1f}x")
        print(f"max |difference|: states {dstate:.3e}, values {dvals:.3e}")
    else:
        print("numba is not installed; only the fallback path was timed")


if __name__ == "__main__":
    main()
