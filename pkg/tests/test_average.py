import math

import numpy as np
import pytest

from qpsync.average import (MeanPsfEstimate, QuadratureObjective, grad_mean_psf,
                            mean_psf_montecarlo, mean_psf_quadrature, sphere_rule)
from qpsync.errors import InvalidInputError
from qpsync.gates import U_MAX, CircuitParams, u_c, u_g
from qpsync.psf import psf
from qpsync.states import PureAngles, pure_state

# frozen from the vectorized path; the order-6 value is cross-checked below
# against a node-by-node density-matrix evaluation
UMAX_Q12 = 0.34358083252484906
UMAX_Q24 = 0.3486953045009559


def test_sphere_rule_weights_and_exactness():
    nodes, w = sphere_rule(8)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    # <n_z^2> = 1/3, <n_x^2> = 1/3, <n_x n_y> = 0 on the unit sphere
    assert w @ nodes[:, 3] ** 2 == pytest.approx(1 / 3, abs=1e-14)
    assert w @ nodes[:, 1] ** 2 == pytest.approx(1 / 3, abs=1e-14)
    assert abs(w @ (nodes[:, 1] * nodes[:, 2])) < 1e-15
    with pytest.raises(InvalidInputError):
        sphere_rule(3)


def test_quadrature_matches_density_matrix_oracle():
    order = 6
    u, w = np.polynomial.legendre.leggauss(order)
    th = np.arccos(u)
    ph = 2 * math.pi * np.arange(order) / order
    x = np.array([0.3, 1.2, 2.1, 0.4, 1.7, 2.9, 0.8, 5.0])
    ug = u_g(x)
    total = 0.0
    for i in range(order):
        for k in range(order):
            r1 = pure_state(PureAngles(th[i], ph[k]))
            for j in range(order):
                for l in range(order):
                    v = psf(np.kron(r1, pure_state(PureAngles(th[j], ph[l]))), ug)
                    if v.defined:
                        total += w[i] * w[j] / 4 / order**2 * v.value
    assert mean_psf_quadrature(x, order).value == pytest.approx(total, abs=1e-13)


def test_frozen_umax_values():
    assert mean_psf_quadrature(U_MAX, 12).value == pytest.approx(UMAX_Q12, abs=1e-12)
    est = mean_psf_quadrature(U_MAX)
    assert est.value == pytest.approx(UMAX_Q24, abs=1e-12)
    assert est.std_error == 0.0 and est.n_total == 24**4


def test_swap_mean_is_zero():
    est = mean_psf_quadrature(CircuitParams())
    assert abs(est.value) < 1e-10


def test_core_only_mean_is_zero(rng):
    for a, b, g in rng.uniform(0, 2 * math.pi, (5, 3)):
        assert abs(mean_psf_quadrature(np.r_[a, b, g, np.zeros(5)]).value) < 1e-8


def test_core_pointwise_symmetry(rng):
    # F(pi - phi1, -phi2, pi - theta1, pi - theta2) = -F(phi1, phi2, theta1, theta2) for the bare core
    for _ in range(200):
        a, b, g = rng.uniform(0, 2 * math.pi, 3)
        t1, t2 = rng.uniform(0, math.pi, 2)
        f1, f2 = rng.uniform(0, 2 * math.pi, 2)
        u = u_c(a, b, g)
        lhs = psf(np.kron(pure_state(PureAngles(math.pi - t1, math.pi - f1)),
                          pure_state(PureAngles(math.pi - t2, -f2))), u)
        rhs = psf(np.kron(pure_state(PureAngles(t1, f1)), pure_state(PureAngles(t2, f2))), u)
        if rhs.defined:
            assert lhs.value == pytest.approx(-rhs.value, abs=1e-10)


def test_periodicity(rng):
    x = rng.uniform(0, 2 * math.pi, 8)
    base = mean_psf_quadrature(x, 12).value
    for k in range(8):
        y = x.copy()
        y[k] += 2 * math.pi
        assert mean_psf_quadrature(y, 12).value == pytest.approx(base, abs=1e-10)


def test_gradient_vanishes_at_extrema():
    for p in (U_MAX, U_MAX.replace(sigma1=math.pi)):
        g = grad_mean_psf(p, h=1e-4)
        assert np.abs(g).max() <= 1e-5


def test_gradient_generic_point_nonzero(rng):
    g = grad_mean_psf(rng.uniform(0, 2 * math.pi, 8), order=12)
    assert np.linalg.norm(g) > 1e-3


def test_gradient_step_range():
    with pytest.raises(InvalidInputError):
        grad_mean_psf(U_MAX, h=1e-2)
    with pytest.raises(InvalidInputError):
        grad_mean_psf(U_MAX, method="adjoint")


@pytest.mark.parametrize("soften", [0.0, 0.05])
def test_ascent_gradient_matches_finite_differences(rng, soften):
    obj = QuadratureObjective(12, soften=soften)
    x = rng.uniform(0, 2 * math.pi, 8)
    f, g = obj.value_and_gradient(x)
    assert f == pytest.approx(obj(x), abs=1e-14)
    assert np.allclose(g, obj.gradient(x, 1e-5), atol=1e-7)


def test_montecarlo_identity_and_umax():
    est = mean_psf_montecarlo(np.zeros(8), 200_000, seed=3)
    assert abs(est.value) < 4 * est.std_error
    est = mean_psf_montecarlo(U_MAX, 200_000, seed=4)
    assert abs(est.value - 0.349) < 4 * est.std_error
    assert est.n_undefined <= 1e-3 * est.n_total


def test_montecarlo_deterministic_across_workers():
    a = mean_psf_montecarlo(U_MAX, 150_000, seed=9, workers=1)
    b = mean_psf_montecarlo(U_MAX, 150_000, seed=9, workers=3)
    assert a == b
    assert a != mean_psf_montecarlo(U_MAX, 150_000, seed=10)


def test_quadrature_and_montecarlo_agree(rng):
    for x in [*rng.uniform(0, 2 * math.pi, (3, 8)), U_MAX.as_array()]:
        q = mean_psf_quadrature(x, 32)
        mc = mean_psf_montecarlo(x, 200_000, seed=1)
        assert abs(q.value - mc.value) < 4 * mc.std_error


def test_montecarlo_input_check():
    with pytest.raises(InvalidInputError):
        mean_psf_montecarlo(U_MAX, 0)
