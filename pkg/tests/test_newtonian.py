import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geomech.dynamics import SecondOrderEquation
from geomech.lagrangian import Lagrangian, lagrangian_connection, legendre
from geomech.newtonian import (ExternalForce, MassTensor, NewtonianSystem, apply_force,
                               check_newtonian, equation_of_motion, evolution_derivative)
from geomech.symcore import CoordSystem, Verdict, is_zero, parse

from randgen import random_quadratic_lagrangian

CS1 = CoordSystem.standard(1, params=["k", "m0"])
FRICTION = SecondOrderEquation(CS1, ["-k*q1_t/m0"])


def test_constant_mass_is_not_compatible_with_friction():
    rep = check_newtonian(MassTensor(CS1, [["m0"]]), FRICTION)
    assert not rep.passed
    assert str(rep.compatibility_residuals[(0, 0)]) == "-k"


def test_growing_mass_is_compatible_with_friction():
    rep = check_newtonian(MassTensor(CS1, [["m0*exp(k*t/m0)"]]), FRICTION)
    assert rep.passed and rep.verdict is Verdict.ZERO


def test_mass_tensor_validation():
    cs = CoordSystem.standard(2)
    with pytest.raises(ValueError, match="symmetric"):
        MassTensor(cs, [["1", "q1"], ["0", "1"]])
    with pytest.raises(ValueError, match="2x2"):
        MassTensor(cs, [["1"]])
    assert MassTensor.identity(cs).is_standard
    assert not MassTensor(cs, [["1 + q1_t^2", "0"], ["0", "1"]]).is_standard


def test_velocity_dependent_mass_symmetry_condition():
    cs = CoordSystem.standard(2)
    m = MassTensor(cs, [["q2_t", "0"], ["0", "1"]])
    rep = check_newtonian(m, SecondOrderEquation.free(cs))
    assert rep.symmetry is Verdict.NONZERO
    assert str(rep.symmetry_residuals[(0, 0, 1)]) == "1"


def test_evolution_derivative():
    e = parse("t*q1*q1_t", CS1)
    got = evolution_derivative(e, FRICTION)
    assert is_zero(got - parse("q1*q1_t + t*q1_t^2 - k*t*q1*q1_t/m0", CS1)) is Verdict.ZERO


def test_apply_force():
    cs = CoordSystem.standard(1, params=["k", "m0"])
    system = NewtonianSystem(MassTensor(cs, [["m0"]]), SecondOrderEquation.free(cs))
    spring = apply_force(system, ExternalForce(cs, ["-k*q1"]))
    assert str(spring.equation.xi[0]) == "-k*q1/m0"
    assert spring.admissible is Verdict.ZERO
    drag = apply_force(system, ExternalForce(cs, ["-k*q1_t"]))
    assert drag.admissible is Verdict.NONZERO
    assert str(drag.residuals[(0, 0)]) == "-2*k"


def test_equation_of_motion():
    system = NewtonianSystem(MassTensor(CS1, [["m0"]]), FRICTION)
    (r,) = equation_of_motion(system)
    assert is_zero(r - parse("m0*q1_tt + k*q1_t", CS1)) is Verdict.ZERO


def test_velocity_dependent_lagrangian_is_newtonian():
    cs = CoordSystem.standard(2)
    L = Lagrangian(cs, "exp(q1_t) + 1/2*q2_t^2 + q1*q2_t - q1^2*q2")
    data = legendre(L)
    rep = check_newtonian(MassTensor(cs, data.hessian), lagrangian_connection(L))
    assert rep.passed


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_regular_lagrangians_are_newtonian(seed):
    rng = np.random.default_rng(seed)
    cs = CoordSystem.standard(int(rng.integers(1, 4)))
    L = Lagrangian(cs, random_quadratic_lagrangian(rng, cs))
    rep = check_newtonian(MassTensor(cs, legendre(L).hessian), lagrangian_connection(L))
    assert rep.passed
