import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geomech.dynamics import (DynamicConnection, NotQuadratic, SecondOrderEquation,
                              connection_from_equation, curvature_report, equation_from_connection,
                              geodesic_check, geodesic_connection, is_symmetric, quadratic_split,
                              torsion)
from geomech.symcore import CoordSystem, Verdict, all_zero, is_zero, parse

from randgen import jet1_names, poly_text

CS1 = CoordSystem.standard(1, params=["w", "k", "m0"])
CS2 = CoordSystem.standard(2, params=["w"])


def random_equation(rng, cs):
    return SecondOrderEquation(cs, [poly_text(rng, jet1_names(cs), 3, 5) for _ in range(cs.dim)])


def test_connection_of_damped_oscillator():
    eq = SecondOrderEquation(CS1, ["-w^2*q1 - k*q1_t"])
    g = connection_from_equation(eq)
    assert str(g.gammaj[0][0]) == "-1/2*k"
    assert is_zero(g.gamma0[0] - parse("-w^2*q1 - 1/2*k*q1_t", CS1)) is Verdict.ZERO


def test_free_equation_has_zero_connection():
    g = connection_from_equation(SecondOrderEquation.free(CS2))
    assert all(x.is_zero_form for x in g.gamma0 + sum(g.gammaj, ()))


def test_wrong_shapes_rejected():
    with pytest.raises(ValueError):
        SecondOrderEquation(CS2, ["q1"])
    with pytest.raises(ValueError, match="jet order"):
        SecondOrderEquation(CS1, ["q1_tt"])
    with pytest.raises(ValueError, match="shape"):
        DynamicConnection(CS1, ["0"], [["0", "0"]])


def test_oscillator_curvature():
    # q_tt = -q: gamma_0 = -q, gamma_1 = 0, so R^1_{01} = d_0 gamma_1 - d_1 gamma_0 = 1
    eq = SecondOrderEquation(CS1, ["-q1"])
    rep = curvature_report(connection_from_equation(eq))
    assert str(rep.R[0][0][1]) == "1"
    assert str(rep.R[0][1][0]) == "-1"
    assert rep.verdict() is Verdict.NONZERO
    assert str(rep.Rtilde) == "1"


def test_free_motion_is_flat():
    eq = SecondOrderEquation.free(CS2)
    assert curvature_report(connection_from_equation(eq)).verdict() is Verdict.ZERO


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_curvature_is_antisymmetric(seed):
    rng = np.random.default_rng(seed)
    rep = curvature_report(connection_from_equation(random_equation(rng, CS2)))
    for plane in rep.R:
        for lam in range(3):
            for mu in range(3):
                assert is_zero(plane[lam][mu] + plane[mu][lam]) is Verdict.ZERO


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_round_trip_and_torsion_free(seed):
    rng = np.random.default_rng(seed)
    eq = random_equation(rng, CS2)
    g = connection_from_equation(eq)
    back = equation_from_connection(g)
    assert all_zero(a - b for a, b in zip(back.xi, eq.xi)) is Verdict.ZERO
    assert all_zero(x for row in torsion(g) for x in row) is Verdict.ZERO
    assert is_symmetric(g) is Verdict.ZERO
    g2 = connection_from_equation(back)
    assert all(a.key == b.key for a, b in zip(g.gamma0, g2.gamma0))


def test_connection_with_torsion_does_not_round_trip():
    g = DynamicConnection(CS1, ["0"], [["q1"]])
    assert str(torsion(g)[0][0]) == "q1"
    assert is_symmetric(g) is Verdict.NONZERO
    g2 = connection_from_equation(equation_from_connection(g))
    assert str(g2.gammaj[0][0]) == "1/2*q1"


def test_quadratic_split():
    eq = SecondOrderEquation(CS2, ["q1*q2_t^2 + t*q1_t + 3", "-w^2*q2 + q1_t*q2_t"])
    a, b, f = quadratic_split(eq)
    assert str(a[0][1][1]) == "q1"
    assert str(a[1][0][1]) == "1/2" and str(a[1][1][0]) == "1/2"
    assert str(b[0][0]) == "t"
    assert str(f[0]) == "3" and str(f[1]) == "-q2*w^2"


def test_not_quadratic():
    with pytest.raises(NotQuadratic):
        quadratic_split(SecondOrderEquation(CS1, ["sin(q1_t)"]))
    with pytest.raises(NotQuadratic):
        quadratic_split(SecondOrderEquation(CS1, ["q1_t^3"]))


def test_geodesic_connection_components():
    eq = SecondOrderEquation(CS1, ["-k*q1_t/m0 + q1*q1_t^2"])
    K = geodesic_connection(eq)
    assert str(K.K(0, 0, 0)) == "0"
    assert str(K.K(0, 0, 1)) == "-1/2*k/m0"
    assert K.K(0, 0, 1).key == K.K(1, 0, 0).key
    assert str(K.K(1, 0, 1)) == "q1"
    assert geodesic_check(eq, K) is Verdict.ZERO


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_geodesic_reproduces_random_quadratic_equations(seed):
    rng = np.random.default_rng(seed)
    base = ["t", "q1", "q2"]
    xi = []
    for _ in range(2):
        xi.append(f"({poly_text(rng, base, 1, 2)})*q1_t*q2_t + ({poly_text(rng, base, 1, 2)})*q2_t"
                  f" + {poly_text(rng, base, 2, 3)}")
    assert geodesic_check(SecondOrderEquation(CS2, xi)) is Verdict.ZERO
