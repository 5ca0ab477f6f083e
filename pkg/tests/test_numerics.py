import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geomech.dynamics import SecondOrderEquation
from geomech.hamiltonian import Hamiltonian
from geomech.lagrangian import Lagrangian, energy_function, lagrangian_connection
from geomech.numerics import (IntegrationError, IntegratorConfig, compile_exprs, conservation_drift,
                              evaluate_along, integrate_dynamic, integrate_hamilton, jit_available,
                              jit_requested, using_jit)
from geomech.numerics import kernels
from geomech.symcore import CoordSystem, evaluate, parse
from geomech.symcore.evaluate import UnboundSymbolError

from randgen import jet1_names, poly_text

CS1 = CoordSystem.standard(1, params={"w": 1.0})
CS3 = CoordSystem.standard(3)
KEPLER = Lagrangian(CS3, "1/2*(q1_t^2 + q2_t^2 + q3_t^2) + 1/(q1^2 + q2^2 + q3^2)^(1/2)")
OSC = SecondOrderEquation(CS1, ["-w^2*q1"])
needs_numba = pytest.mark.skipif(not jit_available(), reason="numba is not installed")


def random_rows(rng, n, cols):
    return rng.uniform(0.2, 1.5, size=(n, cols)) * rng.choice((-1.0, 1.0), size=(n, cols))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_programs_match_tree_evaluation(seed):
    rng = np.random.default_rng(seed)
    names = jet1_names(CS1)
    body = poly_text(rng, names, 2, 3)
    exprs = [parse(f"sin({body})*exp(-q1^2) + ({body})^3", CS1),
             parse(f"cos(q1_t)/(2 + q1^2)^(3/2) + t*({body})", CS1)]
    prog = compile_exprs(exprs, names)
    X = random_rows(rng, 20, len(names))
    k = kernels.get_kernels(False)
    fast, bad = k["eval_rows"](prog.ops, prog.args, prog.consts, prog.n_reg, prog.stack_size, X,
                               prog.n_out)
    slow, bad2 = k["eval_rows_scalar"](prog.ops, prog.args, prog.consts, prog.n_reg,
                                       prog.stack_size, X, prog.n_out)
    assert bad == bad2 == -1
    np.testing.assert_allclose(fast, slow, rtol=1e-12, atol=1e-12)
    for r in range(3):
        pt = dict(zip(names, X[r]))
        for j, e in enumerate(exprs):
            assert fast[r, j] == pytest.approx(evaluate(e, pt), rel=1e-12, abs=1e-13)


def test_domain_errors_are_flagged():
    prog = compile_exprs([parse("log(q1)"), parse("q1^(1/2)")], ["q1"])
    X = np.array([[1.0], [2.0], [-1.0], [3.0]])
    for jit in ([False, True] if jit_available() else [False]):
        k = kernels.get_kernels(jit)
        for name in ("eval_rows",) + (("eval_rows_scalar",) if not jit else ()):
            _, bad = k[name](prog.ops, prog.args, prog.consts, prog.n_reg, prog.stack_size, X, 2)
            assert bad == 2


def test_unbound_column():
    with pytest.raises(UnboundSymbolError):
        compile_exprs([parse("q1 + q2")], ["q1"])


def test_step_adjustment():
    assert IntegratorConfig(h=0.1, t1=1.0).steps() == (10, pytest.approx(0.1))
    n, h = IntegratorConfig(h=0.3, t1=1.0).steps()
    assert n == 4 and h == pytest.approx(0.25)


@pytest.mark.parametrize("kw", [{"h": 0}, {"t1": 0}, {"stride": 0}, {"method": "euler"}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        IntegratorConfig(**kw)


def test_oscillator_solution():
    traj = integrate_dynamic(OSC, [1.0], [0.0], IntegratorConfig(h=1e-3, t1=2.0))
    assert traj.times[-1] == pytest.approx(2.0)
    assert traj.column("q1")[-1] == pytest.approx(math.cos(2.0), abs=1e-11)
    assert traj.column("q1_t")[-1] == pytest.approx(-math.sin(2.0), abs=1e-11)
    fast = integrate_dynamic(OSC, [1.0], [0.0], IntegratorConfig(h=1e-3, t1=2.0), params={"w": 2})
    assert fast.column("q1")[-1] == pytest.approx(math.cos(4.0), abs=1e-10)


def test_stride_thins_the_output():
    traj = integrate_dynamic(OSC, [1.0], [0.0], IntegratorConfig(h=0.01, t1=1.0, stride=10))
    assert len(traj.times) == 11
    np.testing.assert_allclose(traj.times, np.linspace(0, 1, 11), atol=1e-12)


def test_parameter_checks():
    cs = CoordSystem.standard(1, params=["k"])
    eq = SecondOrderEquation(cs, ["-k*q1"])
    with pytest.raises(UnboundSymbolError, match="k"):
        integrate_dynamic(eq, [1.0], [0.0], IntegratorConfig(h=0.1, t1=1.0))
    traj = integrate_dynamic(eq, [1.0], [0.0], IntegratorConfig(h=0.1, t1=1.0), params={"k": 1})
    assert traj.params == {"k": 1.0}


def test_hamilton_integration_matches_dynamic():
    H = Hamiltonian(CS3, "1/2*(p1^2 + p2^2 + p3^2) - 1/(q1^2 + q2^2 + q3^2)^(1/2)")
    cfg = IntegratorConfig(h=1e-3, t1=2.0)
    a = integrate_hamilton(H, [1, 0, 0], [0, 1.1, 0.1], cfg)
    b = integrate_dynamic(lagrangian_connection(KEPLER), [1, 0, 0], [0, 1.1, 0.1], cfg)
    assert a.columns[3:] == ("p1", "p2", "p3") and a.kind == "hamilton"
    np.testing.assert_allclose(a.states, b.states, atol=1e-12)


def test_kepler_energy_is_conserved():
    traj = integrate_dynamic(lagrangian_connection(KEPLER), [1, 0, 0], [0, 1, 0],
                             IntegratorConfig(h=1e-3, t1=2 * math.pi))
    stats = conservation_drift(energy_function(KEPLER), traj)
    assert stats.initial == pytest.approx(-0.5)
    assert stats.max_rel < 1e-10 and stats.samples == len(traj.times)
    assert set(stats.as_dict()) == {"initial", "max_abs_drift", "max_rel_drift", "samples"}
    # one period brings the circular orbit back to its start
    np.testing.assert_allclose(traj.states[-1], [1, 0, 0, 0, 1, 0], atol=1e-9)


def test_evaluate_along():
    traj = integrate_dynamic(OSC, [1.0], [0.0], IntegratorConfig(h=0.01, t1=1.0))
    vals = evaluate_along([parse("q1^2 + q1_t^2", CS1), parse("t", CS1)], traj)
    assert vals.shape == (101, 2)
    np.testing.assert_allclose(vals[:, 0], 1.0, atol=1e-9)
    np.testing.assert_allclose(vals[:, 1], traj.times)


def test_collision_raises_integration_error():
    eq = lagrangian_connection(KEPLER)
    with pytest.raises(IntegrationError) as ei:
        integrate_dynamic(eq, [0, 0, 0], [1, 0, 0], IntegratorConfig(h=1e-3, t1=1.0))
    assert ei.value.time == 0.0


def test_domain_error_reports_the_failing_time():
    cs = CoordSystem.standard(1)
    eq = SecondOrderEquation(cs, ["log(q1)"])
    with pytest.raises(IntegrationError, match="log") as ei:
        integrate_dynamic(eq, [1.0], [-1.0], IntegratorConfig(h=1e-2, t1=3.0))
    # q1 stays close to 1 - t until the argument of the logarithm turns negative
    assert 0.5 < ei.value.time < 1.5


def test_csv_output(tmp_path):
    traj = integrate_dynamic(OSC, [1.0], [0.0], IntegratorConfig(h=0.1, t1=1.0))
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    rows = list(csv.reader(open(path, encoding="utf-8")))
    assert rows[0] == ["t", "q1", "q1_t"]
    assert len(rows) == 12
    assert float(rows[-1][1]) == traj.states[-1, 0]


def test_jit_flag(monkeypatch):
    monkeypatch.setenv("GEOMECH_NO_JIT", "1")
    assert not jit_requested() and not using_jit()
    assert kernels.get_kernels()["rk4"] is kernels.rk4
    monkeypatch.setenv("GEOMECH_NO_JIT", "0")
    assert jit_requested()
    assert using_jit() == jit_available()


@needs_numba
def test_jit_and_fallback_agree():
    eq = lagrangian_connection(KEPLER)
    cfg = IntegratorConfig(h=1e-3, t1=1.0)
    a = integrate_dynamic(eq, [1, 0, 0], [0, 1.2, 0.1], cfg, jit=False)
    b = integrate_dynamic(eq, [1, 0, 0], [0, 1.2, 0.1], cfg, jit=True)
    np.testing.assert_allclose(a.states, b.states, rtol=0, atol=1e-13)
    E = [energy_function(KEPLER)]
    np.testing.assert_allclose(evaluate_along(E, a, jit=False), evaluate_along(E, b, jit=True),
                               rtol=1e-14, atol=1e-14)


def energy_drift(xi, energy, q0, h, t1=10.0):
    cs = CoordSystem.standard(1)
    traj = integrate_dynamic(SecondOrderEquation(cs, [xi]), [q0], [0.0], IntegratorConfig(h=h, t1=t1))
    return conservation_drift(parse(energy, cs), traj).max_abs


def test_linear_oscillator_drift_is_fifth_order():
    # RK4 applied to a linear oscillator loses energy at O(h^5) per unit time,
    # so halving the step divides the drift by almost exactly 32
    ratio = (energy_drift("-100*q1", "1/2*q1_t^2 + 50*q1^2", 1.0, 2e-3)
             / energy_drift("-100*q1", "1/2*q1_t^2 + 50*q1^2", 1.0, 1e-3))
    assert 31.0 < ratio < 33.0


def test_anharmonic_drift_is_fourth_order():
    ratio = (energy_drift("-q1 - q1^3", "1/2*q1_t^2 + 1/2*q1^2 + 1/4*q1^4", 3.0, 2e-3)
             / energy_drift("-q1 - q1^3", "1/2*q1_t^2 + 1/2*q1^2 + 1/4*q1^4", 3.0, 1e-3))
    assert 8.0 <= ratio <= 32.0
