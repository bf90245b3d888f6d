import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_affine
from ifsflex.conjugacy import (
    build_h,
    cauchy_profile,
    estimate_holder,
    holder_exponent_theory,
    limit_set_hull,
)
from ifsflex.errors import EnumerationTooLarge
from ifsflex.ifs_model import AffineSystem, apply_branch

HQ = AffineSystem((0.5, 0.25))
QH = AffineSystem((0.25, 0.5))
SQUARE = AffineSystem((0.25, 1 / 16))
SIXTH = AffineSystem((1 / 3, 1 / 6))
EQ_A = AffineSystem((0.2, 0.2, 0.2), (0.0, 0.4, 0.8))
EQ_B = AffineSystem((0.2, 0.2, 0.2), (0.0, 0.25, 0.8))


def test_identity():
    for n in (0, 3, 7):
        h = build_h(HQ, HQ, n)
        assert np.array_equal(h.breakpoints, h.values)
    assert holder_exponent_theory(HQ, HQ) == 1.0


def test_level_one_maps_hulls():
    h = build_h(HQ, QH, 1)
    assert list(h.breakpoints) == [0.0, 0.5, 0.75, 1.0]
    assert list(h.values) == [0.0, 0.25, 0.5, 1.0]
    assert h(0.25) == pytest.approx(0.125)
    assert h(0.875) == pytest.approx(0.75)


def test_hull_uses_limit_set_not_domain():
    s = AffineSystem((0.3, 0.3), (0.1, 0.5))
    lo, hi = limit_set_hull(s)
    assert lo == pytest.approx(0.1 / 0.7) and hi == pytest.approx(0.5 / 0.7)
    h = build_h(s, s, 0)
    assert h.domain == pytest.approx((lo, hi))


def test_theory_exponents():
    assert holder_exponent_theory(HQ, SQUARE) == pytest.approx(2.0, abs=1e-14)
    assert holder_exponent_theory(HQ, SIXTH) == pytest.approx(math.log(6) / math.log(4), abs=1e-14)
    assert holder_exponent_theory(HQ, SIXTH) == pytest.approx(1.2925, abs=1e-4)


def test_cap():
    with pytest.raises(EnumerationTooLarge):
        build_h(HQ, QH, 30)


def test_rejects_order_mismatch():
    touching = AffineSystem((0.5, 0.5))
    with pytest.raises(ValueError):
        build_h(touching, HQ, 2)


def test_estimates():
    assert estimate_holder(build_h(HQ, HQ, 8), HQ, HQ, 300, 1).slope == pytest.approx(1.0, abs=0.02)
    assert estimate_holder(build_h(HQ, SQUARE, 10), HQ, SQUARE, 400, 0).slope == pytest.approx(2.0, abs=0.05)
    est = estimate_holder(build_h(EQ_A, EQ_B, 7), EQ_A, EQ_B, 400, 0)
    assert est.slope == pytest.approx(1.0, abs=0.05)
    assert 0.2 < est.ratio_min <= est.ratio_max < 5.0
    with pytest.raises(ValueError):
        estimate_holder(build_h(HQ, HQ, 4), HQ, HQ, 200, 0)
    with pytest.raises(ValueError):
        estimate_holder(build_h(HQ, HQ, 8), HQ, HQ, 50, 0)


def test_estimate_is_seeded():
    h = build_h(HQ, SIXTH, 9)
    assert estimate_holder(h, HQ, SIXTH, 200, 5) == estimate_holder(h, HQ, SIXTH, 200, 5)


def test_empirical_exponent_not_below_theory():
    for phi, psi in ((HQ, SQUARE), (HQ, SIXTH), (EQ_A, EQ_B), (HQ, QH)):
        n = 10 if phi.d == 2 else 7
        est = estimate_holder(build_h(phi, psi, n), phi, psi, 400, 0)
        assert est.slope >= holder_exponent_theory(phi, psi) - 0.05


def test_geometric_cauchy_decay():
    diffs = cauchy_profile(HQ, SIXTH, range(2, 9))
    ratios = np.array(diffs[1:]) / np.array(diffs[:-1])
    assert np.all(ratios <= max(SIXTH.rates) + 0.02)


pairs = st.tuples(st.integers(0, 2**31), st.integers(2, 3)).map(
    lambda t: (random_affine(np.random.default_rng(t[0]), d=t[1]), random_affine(np.random.default_rng(t[0] + 1), d=t[1]))
)


@given(pairs, st.integers(1, 6))
def test_monotone_and_equivariant(pair, n):
    phi, psi = pair
    h = build_h(phi, psi, n)
    assert np.all(np.diff(h.breakpoints) > 0) and np.all(np.diff(h.values) > 0)
    # h_n(phi_i x) = psi_i(h_{n-1} x) on the depth-(n-1) breakpoints
    prev = build_h(phi, psi, n - 1)
    # rounding in x is amplified by the slope of h
    slope = np.max(np.diff(h.values) / np.diff(h.breakpoints))
    tol = 1e-13 * (1 + slope)
    for i in range(1, phi.d + 1):
        for x, y in zip(prev.breakpoints, prev.values):
            assert h(apply_branch(phi, i, x)) == pytest.approx(apply_branch(psi, i, y), abs=tol)


@given(pairs)
def test_uniform_cauchy_bound(pair):
    phi, psi = pair
    lo, hi = limit_set_hull(psi)
    for n, dn in zip(range(0, 6), cauchy_profile(phi, psi, range(0, 6))):
        assert dn <= max(psi.rates) ** n * (hi - lo) + 1e-12
