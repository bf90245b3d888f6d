import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_affine
from ifsflex.errors import NoRootError
from ifsflex.ifs_model import CF12, AffineSystem
from ifsflex.thermo import (
    CylinderPressure,
    conformal_jacobian,
    cylinder_mass,
    gibbs_weights,
    hausdorff_dimension,
    pressure,
    pressure_affine,
    pressure_cylinder,
    pressure_derivative,
    pressure_oracle,
    tabulated_oracle,
)

HQ = AffineSystem((0.5, 0.25))
GOLDEN_DIM = math.log((1 + math.sqrt(5)) / 2) / math.log(2)


def test_affine_pressure_examples():
    assert pressure_affine(HQ, 1) == pytest.approx(math.log(0.75), abs=1e-15)
    assert pressure_affine(HQ, 0) == pytest.approx(math.log(2), abs=1e-15)
    third = AffineSystem((1 / 3,) * 3)
    for u in (-3.0, 0.5, 7.0):
        assert pressure_affine(third, u) == pytest.approx((1 - u) * math.log(3), abs=1e-13)


def test_affine_pressure_large_u_does_not_overflow():
    for u in (-500.0, 500.0):
        p = pressure_affine(HQ, u)
        assert math.isfinite(p)
    assert pressure_affine(HQ, 500.0) == pytest.approx(500 * math.log(0.5), rel=1e-15)


def test_cylinder_pressure_affine_exact():
    for n in (1, 4, 9):
        up, low = pressure_cylinder(HQ, 1.3, n)
        assert up == pytest.approx(pressure_affine(HQ, 1.3), abs=1e-14)
        assert low == pytest.approx(up, abs=1e-14)


def test_cylinder_pressure_moebius():
    a = CylinderPressure(CF12, 8).midpoint(1.0)
    b = CylinderPressure(CF12, 12).midpoint(1.0)
    assert abs(a - b) < 1e-2
    for n in (3, 8):
        up, low = pressure_cylinder(CF12, 0.0, n)
        assert up == pytest.approx(math.log(2), abs=1e-14) and low == pytest.approx(math.log(2), abs=1e-14)


def test_cylinder_gap_bounded_by_distortion():
    from ifsflex.ifs_model import distortion_constant

    logc = math.log(distortion_constant(CF12, 10))
    for n in (4, 8, 12):
        for u in (-2.0, 0.5, 3.0):
            up, low = pressure_cylinder(CF12, u, n)
            assert 0 <= up - low <= abs(u) * logc / n + 1e-12


def test_pressure_derivative_examples():
    assert pressure_derivative(HQ, 0) == pytest.approx((math.log(2) + math.log(4)) / 2, abs=1e-14)
    assert pressure_derivative(HQ, 1) == pytest.approx((0.5 * math.log(2) + 0.25 * math.log(4)) / 0.75, abs=1e-14)
    deg = AffineSystem((0.2, 0.2, 0.2))
    for u in (-4, 0, 3):
        assert pressure_derivative(deg, u) == pytest.approx(-math.log(0.2), abs=1e-14)


def test_conformal_derivative_matches_finite_difference_of_midpoint():
    cp = CylinderPressure(CF12, 10)
    for u in (-1.0, 0.5, 2.0):
        h = 1e-5
        fd = (cp.midpoint(u + h) - cp.midpoint(u - h)) / (2 * h)
        assert pressure_derivative(CF12, u) == pytest.approx(-fd, abs=1e-8)


def test_dimension_examples():
    assert hausdorff_dimension(AffineSystem((0.5, 0.5))).value == 1.0
    assert hausdorff_dimension(HQ).value == pytest.approx(GOLDEN_DIM, abs=1e-12)
    res = hausdorff_dimension(CF12, depth=12)
    assert res.method == "cylinder"
    assert res.lower <= res.value <= res.upper
    assert abs(res.value - 0.5313) < 1e-3


def test_dimension_quadratic_oracle():
    # x = (1/2)**delta solves x + x**2 = 1
    delta = hausdorff_dimension(HQ).value
    x = 0.5**delta
    assert x + x * x == pytest.approx(1.0, abs=1e-14)


def test_dimension_no_root():
    with pytest.raises(NoRootError, match="pressure does not cross zero"):
        hausdorff_dimension(AffineSystem((1.0, 1.0)))


def test_gibbs_examples():
    assert gibbs_weights(HQ, 1).weights == pytest.approx((2 / 3, 1 / 3), abs=1e-15)
    assert gibbs_weights(AffineSystem((0.1, 0.3, 0.2)), 0).weights == pytest.approx((1 / 3,) * 3, abs=1e-15)
    w = gibbs_weights(HQ, GOLDEN_DIM).weights
    assert w == pytest.approx((0.5**GOLDEN_DIM, 0.25**GOLDEN_DIM), abs=1e-12)
    assert w == pytest.approx(((math.sqrt(5) - 1) / 2, (3 - math.sqrt(5)) / 2), abs=1e-12)


def test_cylinder_mass_examples():
    w = gibbs_weights(HQ, 1)
    assert cylinder_mass(w, (1, 2)) == pytest.approx(2 / 9, abs=1e-15)
    assert cylinder_mass(w, ()) == 1.0
    u = gibbs_weights(AffineSystem((0.1, 0.2, 0.3)), 0)
    assert cylinder_mass(u, (1, 3, 2, 2)) == pytest.approx(3.0**-4, abs=1e-15)


def test_conformal_jacobian_examples():
    for x in (0.0, 0.3, 1.0):
        assert conformal_jacobian(HQ, 1, 1.0, x) == pytest.approx(2 / 3, abs=1e-14)
        assert conformal_jacobian(HQ, 2, 0.0, x) == pytest.approx(0.5, abs=1e-14)
    a = conformal_jacobian(CF12, 1, 1.0, 0.4)
    b = conformal_jacobian(CF12, 1, 1.0, 0.7)
    assert abs(a - b) > 1e-2


def test_oracles():
    o = pressure_oracle(HQ)
    assert o.method == "exact-affine" and o(1.0) == pressure_affine(HQ, 1.0)
    assert o.derivative(1.0) == pytest.approx(-pressure_derivative(HQ, 1.0), abs=1e-15)
    c = pressure_oracle(CF12, 6)
    assert c.method == "cylinder" and c(1.0) == pressure(CF12, 1.0, 6)
    t = tabulated_oracle([(1.0, 2.0), (3.0, 4.0)])
    assert t(3.0) == 4.0 and t.points == (1.0, 3.0)
    with pytest.raises(KeyError):
        t(2.0)


affine_systems = st.integers(0, 2**32 - 1).map(lambda s: random_affine(np.random.default_rng(s)))


@given(affine_systems, st.floats(-10, 10), st.floats(-10, 10), st.floats(0.01, 0.99))
def test_convexity(system, u1, u2, s):
    for fn in (lambda u: pressure_affine(system, u), CylinderPressure(CF12, 8).midpoint):
        assert fn(s * u1 + (1 - s) * u2) <= s * fn(u1) + (1 - s) * fn(u2) + 1e-10


@given(affine_systems, st.floats(-10, 10), st.floats(0.01, 5))
def test_strict_decrease_and_log_d(system, u, du):
    assert pressure_affine(system, u) > pressure_affine(system, u + du)
    assert pressure_affine(system, 0.0) == pytest.approx(math.log(system.d), abs=1e-14)
    assert pressure(CF12, u) > pressure(CF12, u + du)


@given(affine_systems, st.floats(-5, 5))
def test_derivative_matches_finite_difference(system, u):
    h = 1e-5
    fd = (pressure_affine(system, u + h) - pressure_affine(system, u - h)) / (2 * h)
    assert pressure_derivative(system, u) == pytest.approx(-fd, abs=1e-6)


@given(affine_systems, st.floats(-5, 5), st.lists(st.integers(1, 2), max_size=5), st.lists(st.integers(1, 2), max_size=5))
def test_bernoulli_multiplicativity_and_jacobian(system, u, a, b):
    w = gibbs_weights(system, u)
    assert math.fsum(w.weights) == pytest.approx(1.0, abs=1e-15)
    assert cylinder_mass(w, a + b) == pytest.approx(cylinder_mass(w, a) * cylinder_mass(w, b), rel=1e-12)
    for i in range(1, system.d + 1):
        assert conformal_jacobian(system, i, u, 0.5) == pytest.approx(w.weights[i - 1], rel=1e-12)
