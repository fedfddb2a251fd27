"""Multi-start gradient ascent of the mean PSF and classification of extrema.

The quadrature mean PSF is rugged at fine scales because the integrand has
branch-point singularities where a projected Bloch vector vanishes. The
ascent therefore climbs a softened surrogate of the integrand (see
:class:`QuadratureObjective`), first on a coarse grid and then, for the best
few restarts, on a finer one. Reported values use the plain integrand on a
fine grid.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .average import QuadratureObjective, mean_psf_quadrature
from .closedform import proof_state_catalog
from .errors import InvalidInputError
from .gates import CircuitParams, ParamsLike, _angles, u_c, u_g
from .psf import (EPS_PHASE, bloch_inputs, output_bloch_pairs, phase_fidelity_batch,
                  transfer_tensors)
from .sampling import map_shards, sample_angles, shard_rng

QUARTER = math.pi / 4
BACKTRACK = 0.5
ARMIJO = 1e-4
SOFTEN = 0.05


class Classification(str, Enum):
    COND_MAX = "CondMax"
    COND_MAX_REDUCED = "CondMaxReduced"
    MINIMUM = "Minimum"
    SADDLE_OR_OTHER = "Saddle-or-other"


@dataclass(frozen=True)
class RestartRecord:
    index: int
    start: tuple
    end: tuple
    surrogate_value: float
    grad_norm: float
    iterations: int
    converged: bool
    final_value: Optional[float] = None


@dataclass(frozen=True)
class OptimizationResult:
    best_params: CircuitParams
    best_value: float
    trajectory_len: int
    restarts_used: int
    classification: Classification
    restarts: list = field(default_factory=list)

    @property
    def n_converged(self) -> int:
        return sum(r.converged for r in self.restarts)


def ascend(value_and_grad: Callable, x0, step0: float = 0.1, max_iter: int = 200,
           grad_tol: float = 1e-5):
    """Gradient ascent with Barzilai-Borwein step proposals and Armijo backtracking.

    Returns ``(x, f, grad_norm, iterations)``; ``x`` stays unwrapped.
    """
    x = np.array(x0, dtype=float)
    f, g = value_and_grad(x)
    step, it = step0, 0
    gn = float(np.linalg.norm(g))
    while it < max_iter and gn >= grad_tol:
        while True:
            xn = x + step * g
            fn, gnew = value_and_grad(xn)
            if fn >= f + ARMIJO * step * gn**2 or step < 1e-10:
                break
            step *= BACKTRACK
        s, y = xn - x, gnew - g
        sy = float(s @ y)
        # BB1 step for a concave model; grow cautiously otherwise
        step = float(s @ s) / -sy if sy < 0 else min(2 * step, 10.0)
        step = min(max(step, 1e-6), 50.0)
        x, f, g = xn, fn, gnew
        gn = float(np.linalg.norm(g))
        it += 1
    return x, f, gn, it


def _signed(obj: QuadratureObjective, sign: float):
    def vg(x):
        f, g = obj.value_and_gradient(x)
        return sign * f, sign * g
    return vg


def maximize_mean_psf(restarts: int = 50, seed: int = 0, step0: float = 0.1, max_iter: int = 200,
                      grad_tol: float = 1e-5, minimize: bool = False, search_order: int = 12,
                      polish_order: int = 24, polish_iter: int = 40, n_polish: int = 3,
                      final_order: int = 48, soften: float = SOFTEN, workers: int = 1) -> OptimizationResult:
    """Multi-start ascent (descent with ``minimize``) of the mean PSF.

    Each restart starts from a uniform point of [0, 2pi)^8 drawn from its own
    seeded substream. The ``n_polish`` restarts with the best coarse surrogate
    values are refined on the finer grid and re-evaluated with the plain
    integrand at ``final_order``; the best of those is returned.
    """
    if restarts < 1:
        raise InvalidInputError("restarts must be >= 1")
    sign = -1.0 if minimize else 1.0
    coarse = _signed(QuadratureObjective(search_order, soften=soften), sign)

    def run(r):
        x0 = shard_rng(seed, r).uniform(0, 2 * math.pi, 8)
        x, f, gn, it = ascend(coarse, x0, step0, max_iter, grad_tol)
        return RestartRecord(r, tuple(x0), tuple(x), sign * f, gn, it, gn < grad_tol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run, range(restarts)))
    else:
        records = [run(r) for r in range(restarts)]

    fine = _signed(QuadratureObjective(polish_order, soften=soften), sign)
    ranked = sorted(records, key=lambda rec: (-sign * rec.surrogate_value, rec.index))[:n_polish]
    best = None
    for rec in ranked:
        x, f, gn, it = ascend(fine, rec.end, step0, polish_iter, grad_tol)
        value = mean_psf_quadrature(x, final_order).value
        polished = RestartRecord(rec.index, rec.start, tuple(x), sign * f, gn,
                                 rec.iterations + it, rec.converged or gn < grad_tol, value)
        records[rec.index] = polished
        if best is None or sign * value > sign * best.final_value:
            best = polished
    params = CircuitParams.from_array(best.end)
    return OptimizationResult(params, best.final_value, best.iterations, restarts,
                              classify_extremum(params), records)


def quarter_residuals(params: ParamsLike) -> np.ndarray:
    """Distance of alpha, beta, gamma to the nearest odd multiple of pi/4."""
    a = np.mod(_angles(params)[:3] - QUARTER, 2 * QUARTER)
    return np.minimum(a, 2 * QUARTER - a)


def _circ_dist(x: float, target: float) -> float:
    d = (x - target) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def _reduced_locals(alpha, beta, gamma) -> tuple[float, float]:
    """Optimal (mu1, nu1) when sigma1 = mu2 = nu2 = 0."""
    near_npi = lambda s: _circ_dist(s % math.pi, 0.0) < QUARTER
    mu1 = math.pi / 2 if near_npi(alpha + gamma) else 3 * math.pi / 2
    nu1 = 0.0 if near_npi(alpha + beta) else math.pi
    return mu1, nu1


def classify_extremum(params: ParamsLike, tol: float = 0.02, order: int = 24) -> Classification:
    """Compare ``params`` with the known families of maxima and minima.

    When alpha, beta, gamma sit on odd multiples of pi/4 but the local angles
    are not in the reduced table, maximum and minimum are told apart by the
    sign of the mean PSF.
    """
    x = _angles(params)
    if np.any(quarter_residuals(x) > tol):
        return Classification.SADDLE_OR_OTHER
    alpha, beta, gamma, mu1, mu2, nu1, nu2, sigma1 = x
    mu1_t, nu1_t = _reduced_locals(alpha, beta, gamma)
    table = _circ_dist(mu1, mu1_t) <= tol and _circ_dist(nu1, nu1_t) <= tol
    free = _circ_dist(mu2, 0) <= tol and _circ_dist(nu2, 0) <= tol
    if table and free and _circ_dist(sigma1, 0) <= tol:
        return Classification.COND_MAX_REDUCED
    if table and free and _circ_dist(sigma1, math.pi) <= tol:
        return Classification.MINIMUM
    value = mean_psf_quadrature(x, order).value
    return Classification.COND_MAX if value > 0 else Classification.MINIMUM


@dataclass(frozen=True)
class Witness:
    """A state with a defined PSF below one, or ``found=False``."""

    found: bool
    source: str
    angles: tuple
    value: Optional[float]
    scanned: int


def theorem1_witness(params: ParamsLike, grid_resolution: int = 8, threshold: float = 1 - 1e-6,
                     eps: float = EPS_PHASE) -> Witness:
    """Search the proof states, then a regular grid, for a defined PSF < ``threshold``."""
    if grid_resolution < 8:
        raise InvalidInputError("grid_resolution must be >= 8")
    x = _angles(params)
    t1, t2 = transfer_tensors(u_g(x))

    def lowest(th1, th2, ph1, ph2):
        v1, v2 = bloch_inputs(th1, ph1), bloch_inputs(th2, ph2)
        f, _, _ = phase_fidelity_batch(output_bloch_pairs(t1[:2], v1, v2),
                                       output_bloch_pairs(t2[:2], v1, v2), eps)
        f = np.where(np.isnan(f), np.inf, f)
        k = int(np.argmin(f))
        return k, float(f[k])

    fixtures = np.array([fx.angles(*x[:3]) for fx in proof_state_catalog()]).T
    k, f = lowest(*fixtures)
    if f < threshold:
        return Witness(True, f"proof-state {k + 1}", tuple(fixtures[:, k]), f, len(fixtures.T))
    # open grid in theta avoids the poles, where phases are degenerate
    th = (np.arange(grid_resolution) + 0.5) * math.pi / grid_resolution
    ph = np.arange(grid_resolution) * 2 * math.pi / grid_resolution
    grid = [g.ravel() for g in np.meshgrid(th, th, ph, ph, indexing="ij")]
    k, f = lowest(*grid)
    scanned = len(fixtures.T) + grid[0].size
    if f < threshold:
        return Witness(True, "grid", tuple(g[k] for g in grid), f, scanned)
    return Witness(False, "none", (), None, scanned)


def undefined_fraction_scan(params: ParamsLike, n_samples: int, eps_list, seed: int = 0,
                            workers: int = 1) -> dict:
    """Fraction of uniform inputs whose smaller projected output norm is <= eps."""
    if n_samples < 10_000:
        raise InvalidInputError("n_samples must be >= 1e4")
    eps_list = [float(e) for e in eps_list]
    t1, t2 = transfer_tensors(u_g(params))

    def shard(rng, size, _):
        th1, th2, ph1, ph2 = sample_angles(rng, size)
        v1, v2 = bloch_inputs(th1, ph1), bloch_inputs(th2, ph2)
        m1 = output_bloch_pairs(t1[:2], v1, v2)
        m2 = output_bloch_pairs(t2[:2], v1, v2)
        low = np.minimum(np.hypot(m1[:, 0], m1[:, 1]), np.hypot(m2[:, 0], m2[:, 1]))
        return [int((low <= e).sum()) for e in eps_list]

    counts = np.sum(map_shards(shard, seed, n_samples, workers), axis=0)
    return {e: int(c) / n_samples for e, c in zip(eps_list, counts)}
