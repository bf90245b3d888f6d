import math

import numpy as np
import pytest

from ifsflex.errors import DomainError
from ifsflex.ifs_model import CF12, AffineSystem, apply_branch, cylinder_potential_bounds
from ifsflex.thermo import CylinderPressure, gibbs_weights, pressure_affine
from ifsflex.transfer_operator import (
    bn_profile,
    build_operator,
    jacobian_cocycle,
    leading_eigen,
    operator_dimension,
    operator_pressure,
)

HQ = AffineSystem((0.5, 0.25))


def test_operator_on_constants():
    op = build_operator(HQ, 1.7, 64)
    assert np.allclose(op.matvec(np.ones(64)), 0.5**1.7 + 0.25**1.7, rtol=1e-15)
    op0 = build_operator(CF12, 0.0, 64)
    assert np.allclose(op0.matrix().sum(axis=1), 2.0, rtol=1e-14)
    assert np.all(build_operator(CF12, 1.0, 32).matrix() >= 0)


def test_grid_size_floor():
    with pytest.raises(ValueError):
        build_operator(HQ, 1.0, 8)


def test_adjoint_is_transpose():
    op = build_operator(CF12, 0.8, 40)
    a = op.matrix()
    rng = np.random.default_rng(3)
    v = rng.normal(size=40)
    assert np.allclose(op.matvec(v), a @ v, atol=1e-14)
    assert np.allclose(op.rmatvec(v), a.T @ v, atol=1e-14)


def test_affine_eigenpair():
    eig = leading_eigen(build_operator(HQ, 1.0, 256))
    assert eig.eigenvalue == pytest.approx(0.75, abs=1e-12)
    rho = eig.density.values
    assert np.ptp(rho) / np.mean(rho) < 1e-8
    for system in (HQ, CF12):
        e0 = leading_eigen(build_operator(system, 0.0, 128))
        assert e0.eigenvalue == pytest.approx(2.0, abs=1e-10)
        assert np.ptp(e0.density.values) < 1e-8


def test_normalisation_and_positivity():
    eig = leading_eigen(build_operator(CF12, 1.0, 256))
    assert np.all(eig.density.values > 0) and np.all(eig.adjoint >= 0)
    assert eig.adjoint.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.dot(eig.density.values, eig.adjoint) == pytest.approx(1.0, abs=1e-14)


def test_fixed_point_residual():
    for system, u in ((CF12, 1.0), (CF12, -0.5), (HQ, 2.0)):
        op = build_operator(system, u, 256)
        eig = leading_eigen(op)
        rho = eig.density.values
        r = np.max(np.abs(op.matvec(rho) - eig.eigenvalue * rho)) / np.max(np.abs(rho))
        assert r < 1e-8


def test_grid_refinement():
    a = leading_eigen(build_operator(CF12, 1.0, 256)).eigenvalue
    b = leading_eigen(build_operator(CF12, 1.0, 512)).eigenvalue
    assert abs(a - b) < 1e-6


def test_cross_method_near_dimension():
    u = 2 * 0.5313
    p_op = operator_pressure(CF12, u, 256)
    p_cyl = CylinderPressure(CF12, 12).midpoint(u)
    assert abs(p_op - p_cyl) < 1e-2


def test_operator_dimension_close_to_cylinder():
    assert abs(operator_dimension(CF12, 256) - 0.5313) < 1e-3


def test_bn_profile():
    z = np.linspace(0, 1, 7)
    for n in (1, 4, 8):
        assert np.allclose(bn_profile(HQ, 1.4, pressure_affine(HQ, 1.4), n, z), 1.0, atol=1e-12)
    assert np.all(bn_profile(CF12, 1.0, -0.5, 0, z) == 1.0)
    # for the Moebius fixture b_n settles down as n grows
    eig = leading_eigen(build_operator(CF12, 1.0, 512))
    zs = np.linspace(*CF12.domain, 9)
    b10 = bn_profile(CF12, 1.0, eig.pressure, 10, zs)
    b12 = bn_profile(CF12, 1.0, eig.pressure, 12, zs)
    assert np.max(np.abs(b12 / b10 - 1)) < 1e-3
    # and is proportional to the eigenfunction
    ratio = b12 / eig.density(zs)
    assert np.ptp(ratio) / np.mean(ratio) < 1e-3


def test_jacobian_cocycle_affine_and_u0():
    eig = leading_eigen(build_operator(HQ, 1.0, 128))
    w = gibbs_weights(HQ, 1.0).weights
    for x in (0.0, 0.4, 1.0):
        for i in (1, 2):
            assert jacobian_cocycle(HQ, 1.0, i, x, eig.density, eig.pressure) == pytest.approx(w[i - 1], abs=1e-8)
    e0 = leading_eigen(build_operator(CF12, 0.0, 128))
    for x in (0.4, 0.6):
        total = sum(jacobian_cocycle(CF12, 0.0, i, x, e0.density, e0.pressure) for i in (1, 2))
        assert total == pytest.approx(1.0, abs=1e-6)


def test_jacobian_cocycle_moebius_nonconstant():
    eig = leading_eigen(build_operator(CF12, 1.0, 256))
    a = jacobian_cocycle(CF12, 1.0, 1, 0.37, eig.density, eig.pressure)
    b = jacobian_cocycle(CF12, 1.0, 1, 0.73, eig.density, eig.pressure)
    assert abs(a - b) > 1e-3


def test_cocycle_chain_rule_and_sum_rule():
    eig = leading_eigen(build_operator(CF12, 1.0, 512))
    dens, P = eig.density, eig.pressure
    for x in (0.4, 0.55, 0.7):
        for i in (1, 2):
            for j in (1, 2):
                two = jacobian_cocycle(CF12, 1.0, (i, j), x, dens, P)
                y = apply_branch(CF12, j, x)
                prod = jacobian_cocycle(CF12, 1.0, j, x, dens, P) * jacobian_cocycle(CF12, 1.0, i, y, dens, P)
                assert two == pytest.approx(prod, abs=1e-4)
    total = sum(
        np.dot(eig.adjoint, [jacobian_cocycle(CF12, 1.0, i, x, dens, P) for x in dens.grid]) for i in (1, 2)
    )
    assert total == pytest.approx(1.0, abs=1e-4)


def test_jacobian_domain_error():
    eig = leading_eigen(build_operator(CF12, 1.0, 64))
    with pytest.raises(DomainError):
        jacobian_cocycle(CF12, 1.0, 1, 0.1, eig.density, eig.pressure)
