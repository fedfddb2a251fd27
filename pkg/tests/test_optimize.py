import math

import numpy as np
import pytest

from qpsync.average import mean_psf_quadrature
from qpsync.errors import InvalidInputError
from qpsync.gates import U_MAX, CircuitParams
from qpsync.optimize import (Classification, ascend, classify_extremum, maximize_mean_psf,
                             quarter_residuals, theorem1_witness, undefined_fraction_scan)

Q = math.pi / 4


def test_ascend_on_concave_quadratic():
    target = np.array([1.0, -2.0, 0.5])
    vg = lambda x: (-float(np.sum((x - target) ** 2)), -2 * (x - target))
    x, f, gn, it = ascend(vg, np.zeros(3), max_iter=100, grad_tol=1e-10)
    assert np.allclose(x, target, atol=1e-9) and gn < 1e-10


def test_quarter_residuals():
    r = quarter_residuals([Q, 3 * Q + 0.01, -Q, 0, 0, 0, 0, 0])
    assert np.allclose(r, [0, 0.01, 0])
    assert np.allclose(quarter_residuals(np.zeros(8)), [Q, Q, Q])


def test_classification_examples():
    assert classify_extremum(U_MAX) is Classification.COND_MAX_REDUCED
    assert classify_extremum(U_MAX.replace(sigma1=math.pi)) is Classification.MINIMUM
    assert classify_extremum(CircuitParams()) is Classification.SADDLE_OR_OTHER
    # nu1 off the table: alpha+beta = pi needs nu1 = 0
    assert classify_extremum(U_MAX.replace(nu1=math.pi)) is not Classification.COND_MAX_REDUCED


def test_reduced_table_for_all_condmax_triples():
    # the (mu1, nu1) table gives a maximum for each of the 64 (alpha, beta, gamma) choices
    vals = []
    for a in range(4):
        for b in range(4):
            for g in range(4):
                alpha, beta, gamma = ((2 * k + 1) * Q for k in (a, b, g))
                mu1 = math.pi / 2 if round((alpha + gamma) / math.pi) * math.pi == pytest.approx(alpha + gamma) else 3 * math.pi / 2
                nu1 = 0.0 if round((alpha + beta) / math.pi) * math.pi == pytest.approx(alpha + beta) else math.pi
                p = CircuitParams(alpha, beta, gamma, mu1=mu1, nu1=nu1)
                assert classify_extremum(p) is Classification.COND_MAX_REDUCED
                vals.append(mean_psf_quadrature(p, 12).value)
    assert np.ptp(vals) < 1e-12 and vals[0] > 0.34


def test_sigma_shift_negates_mean(rng):
    for x in [U_MAX.as_array(), *rng.uniform(0, 2 * math.pi, (2, 8))]:
        y = x.copy()
        y[7] += math.pi
        assert mean_psf_quadrature(y).value == pytest.approx(-mean_psf_quadrature(x).value, abs=1e-8)


def test_maximize_small_run_deterministic():
    kw = dict(restarts=2, seed=5, max_iter=30, n_polish=1, polish_iter=5, final_order=24)
    a = maximize_mean_psf(**kw)
    b = maximize_mean_psf(**kw, workers=2)
    assert a.best_params == b.best_params and a.best_value == b.best_value
    assert len(a.restarts) == 2 and a.restarts_used == 2
    assert -1 <= a.best_value <= 1
    with pytest.raises(InvalidInputError):
        maximize_mean_psf(restarts=0)


def test_witness_examples(rng):
    w = theorem1_witness(CircuitParams())
    assert w.found and w.value < 1 - 1e-6
    w = theorem1_witness(U_MAX)
    assert w.found
    for x in rng.uniform(0, 2 * math.pi, (100, 8)):
        assert theorem1_witness(x).found
    with pytest.raises(InvalidInputError):
        theorem1_witness(U_MAX, grid_resolution=4)


def test_undefined_fraction_scan():
    eps = [1e-2, 1e-4, 1e-6]
    fr = undefined_fraction_scan(U_MAX, 100_000, eps, seed=2)
    assert fr[1e-2] >= fr[1e-4] >= fr[1e-6]
    assert fr[1e-2] > 0 and fr[1e-6] <= 1e-3
    assert fr == undefined_fraction_scan(U_MAX, 100_000, eps, seed=2, workers=2)
    assert undefined_fraction_scan(CircuitParams(), 100_000, [1e-9], seed=2)[1e-9] == 0.0
    with pytest.raises(InvalidInputError):
        undefined_fraction_scan(U_MAX, 100, eps)
