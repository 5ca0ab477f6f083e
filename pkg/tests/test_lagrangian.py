import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.calculus.euler import euler_equations

from geomech.lagrangian import (Lagrangian, LagrangeOperator, Regularity, energy_function,
                                euler_lagrange, helmholtz_check, is_variationally_trivial,
                                lagrangian_connection, legendre, momenta, on_shell, poincare_cartan)
from geomech.frames import ReferenceFrame
from geomech.linalg import SingularMatrixError
from geomech.symcore import CoordSystem, Verdict, all_zero, is_zero, parse, total_derivative

from randgen import (base_names, poly_text, random_lagrangian_text, random_quadratic_lagrangian,
                     to_sympy)

CS1 = CoordSystem.standard(1, params=["k", "m0"])
CS3 = CoordSystem.standard(3)
KEPLER = "1/2*(q1_t^2 + q2_t^2 + q3_t^2) + 1/(q1^2 + q2^2 + q3^2)^(1/2)"
HAVAS = "1/2*m0*exp(k*t/m0)*q1_t^2"


def sympy_el(text, n):
    """Euler-Lagrange expressions from sympy, rewritten in jet symbols."""
    t = sympy.Symbol("t")
    fs = [sympy.Function(f"q{i + 1}")(t) for i in range(n)]
    subs = {}
    for i, f in enumerate(fs):
        subs[sympy.Symbol(f"q{i + 1}_t")] = f.diff(t)
        subs[sympy.Symbol(f"q{i + 1}")] = f
    L = sympy.sympify(text.replace("^", "**")).subs(subs, simultaneous=True)
    out = []
    for eq in euler_equations(L, fs, t):
        e = eq.lhs
        for i, f in reversed(list(enumerate(fs))):
            e = e.subs(f.diff(t, 2), sympy.Symbol(f"q{i + 1}_tt"))
            e = e.subs(f.diff(t), sympy.Symbol(f"q{i + 1}_t"))
            e = e.subs(f, sympy.Symbol(f"q{i + 1}"))
        out.append(e)
    return out


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_euler_lagrange_matches_sympy(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 3))
    cs = CoordSystem.standard(n)
    text = random_lagrangian_text(rng, cs)
    E = euler_lagrange(Lagrangian(cs, text)).E
    for got, want in zip(E, sympy_el(text, n)):
        assert sympy.expand(to_sympy(got) - want) == 0


def test_kepler_euler_lagrange():
    E = euler_lagrange(Lagrangian(CS3, KEPLER)).E
    want = parse("-q1/(q1^2 + q2^2 + q3^2)^(3/2) - q1_tt", CS3)
    assert is_zero(E[0] - want) is Verdict.ZERO


def test_havas_euler_lagrange_is_damped_motion():
    (E,) = euler_lagrange(Lagrangian(CS1, HAVAS)).E
    assert is_zero(E * parse("exp(-k*t/m0)", CS1) + parse("m0*q1_tt + k*q1_t", CS1)) is Verdict.ZERO


def test_lagrangian_order_is_checked():
    with pytest.raises(ValueError, match="first-order"):
        Lagrangian(CS1, "q1_tt")


def test_helmholtz_rejects_friction_operator():
    rep = helmholtz_check(LagrangeOperator(CS1, ["m0*q1_tt + k*q1_t"]))
    assert rep.condition("b") is Verdict.NONZERO
    assert rep.condition("a") is Verdict.ZERO and rep.condition("c") is Verdict.ZERO
    assert str(rep.residuals[("b", 0, 0)]) == "2*k"


def test_helmholtz_multiplier_repairs_friction():
    op = LagrangeOperator(CS1, ["-exp(k*t/m0)*(m0*q1_tt + k*q1_t)"])
    assert helmholtz_check(op).verdict is Verdict.ZERO


def test_helmholtz_condition_c():
    cs = CoordSystem.standard(2)
    rep = helmholtz_check(LagrangeOperator(cs, ["q2_tt", "0"]))
    assert rep.condition("c") is Verdict.NONZERO


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_helmholtz_accepts_euler_lagrange_operators(seed):
    rng = np.random.default_rng(seed)
    cs = CoordSystem.standard(int(rng.integers(1, 4)))
    rep = helmholtz_check(euler_lagrange(Lagrangian(cs, random_lagrangian_text(rng, cs))))
    assert rep.verdict is Verdict.ZERO and not rep.flagged


def test_legendre_regular_and_degenerate():
    data = legendre(Lagrangian(CS3, KEPLER))
    assert data.regularity is Regularity.REGULAR and data.certified
    assert str(data.det) == "1"
    gauge = legendre(Lagrangian(CoordSystem.standard(2), "1/2*(q1_t - q2)^2"))
    assert gauge.regularity is Regularity.DEGENERATE


def test_legendre_pointwise_degenerate():
    data = legendre(Lagrangian(CS1, "1/2*q1^2*q1_t^2"))
    assert data.regularity is Regularity.POINTWISE
    assert data.locus == ["q1 = 0"]
    assert str(data.pi[0]) == "q1^2*q1_t"


def test_legendre_sign_change_in_a_sum():
    data = legendre(Lagrangian(CS1, "1/2*(q1 - t)*q1_t^2"))
    assert data.regularity is Regularity.POINTWISE and not data.certified


def test_kepler_connection():
    eq = lagrangian_connection(Lagrangian(CS3, KEPLER))
    for i in range(3):
        want = parse(f"-q{i + 1}/(q1^2 + q2^2 + q3^2)^(3/2)", CS3)
        assert eq.xi[i].key == want.key


def test_degenerate_lagrangian_has_no_connection():
    with pytest.raises(SingularMatrixError):
        lagrangian_connection(Lagrangian(CoordSystem.standard(2), "1/2*(q1_t - q2)^2"))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_connection_solves_euler_lagrange(seed):
    rng = np.random.default_rng(seed)
    cs = CoordSystem.standard(int(rng.integers(1, 4)))
    L = Lagrangian(cs, random_quadratic_lagrangian(rng, cs))
    eq = lagrangian_connection(L)
    assert all_zero(on_shell(euler_lagrange(L).E, eq)) is Verdict.ZERO


def test_poincare_cartan_form():
    L = Lagrangian(CS3, KEPLER)
    pc = poincare_cartan(L)
    assert [str(x) for x in pc.dq] == ["q1_t", "q2_t", "q3_t"]
    assert is_zero(pc.h0(CS3) - L.L) is Verdict.ZERO
    a, b = pc.holonomic(CS3)
    assert all(x.is_zero_form for x in a)
    assert all_zero(x - y for x, y in zip(b, euler_lagrange(L).E)) is Verdict.ZERO


def test_energy_functions():
    L = Lagrangian(CS3, KEPLER)
    want = parse("1/2*(q1_t^2 + q2_t^2 + q3_t^2) - 1/(q1^2 + q2^2 + q3^2)^(1/2)", CS3)
    assert is_zero(energy_function(L) - want) is Verdict.ZERO
    havas = Lagrangian(CS1, HAVAS)
    fr = ReferenceFrame(CS1, ["-k*q1/(2*m0)"])
    printed = parse("1/2*m0*exp(k*t/m0)*q1_t*(q1_t + k*q1/m0)", CS1)
    assert is_zero(energy_function(havas, fr) - printed) is Verdict.ZERO


def test_variational_triviality():
    cs = CoordSystem.standard(2)
    f = parse("t*q1*q2 + q1^3", cs)
    assert is_variationally_trivial(Lagrangian(cs, total_derivative(f, cs))) is Verdict.ZERO
    assert is_variationally_trivial(Lagrangian(cs, "q1_t^2")) is Verdict.NONZERO


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_total_derivative_does_not_change_euler_lagrange(seed):
    rng = np.random.default_rng(seed)
    cs = CoordSystem.standard(2)
    L = parse(random_lagrangian_text(rng, cs), cs)
    f = parse(poly_text(rng, base_names(cs), 3, 4), cs)
    E1 = euler_lagrange(Lagrangian(cs, L)).E
    E2 = euler_lagrange(Lagrangian(cs, L + total_derivative(f, cs))).E
    assert all_zero(a - b for a, b in zip(E1, E2)) is Verdict.ZERO


def test_momenta():
    assert [str(x) for x in momenta(Lagrangian(CS1, HAVAS))] == ["m0*q1_t*exp(k*t/m0)"]
