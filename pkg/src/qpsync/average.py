"""Mean PSF over uniformly distributed pure product inputs.

The quadrature rule is Gauss-Legendre in ``u = cos(theta)`` times the uniform
periodic rule in ``phi``, applied to both qubits. The rule is symmetric under
``theta -> pi - theta``, ``phi -> -phi`` and ``phi -> phi + pi``, so symmetry
identities of the exact integral also hold on the grid. Nodes where the PSF is
undefined are skipped (weight dropped, not renormalized) and counted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError
from .gates import ParamsLike, _angles, u_g, u_g_batch
from .psf import (EPS_PHASE, bloch_inputs, fidelity_from_components, output_bloch_pairs,
                  phase_fidelity_batch, transfer_tensors)
from .sampling import SHARD_SIZE, map_shards, sample_angles

DEFAULT_ORDER = 24


@dataclass(frozen=True)
class MeanPsfEstimate:
    value: float
    std_error: float
    n_undefined: int
    n_total: int


@lru_cache(maxsize=8)
def sphere_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes as input 4-vectors ``(1, n)`` and weights summing to 1."""
    if order < 4:
        raise InvalidInputError(f"quadrature order must be >= 4, got {order}")
    u, w = np.polynomial.legendre.leggauss(order)
    phi = 2 * math.pi * np.arange(order) / order
    uu, pp = np.meshgrid(u, phi, indexing="ij")
    s = np.sqrt(1 - uu**2)
    nodes = np.stack([np.ones_like(uu), s * np.cos(pp), s * np.sin(pp), uu], axis=-1).reshape(-1, 4)
    weights = np.repeat(w / 2, order) / order
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _grid_projections(t: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Projections for every (row, col) input pair; ``t`` has shape (P, 2, 4, 4),
    the result (P, 2, rows, cols)."""
    return np.einsum("ia,pkab,jb->pkij", rows, t, cols, optimize=True)


class QuadratureObjective:
    """Mean PSF on a fixed tensor-product grid.

    With ``soften > 0`` the integrand is the smooth surrogate of
    :func:`phase_fidelity_batch`; it is used to steer gradient ascent and
    is not an estimate of the mean PSF.
    """

    def __init__(self, order: int = DEFAULT_ORDER, eps: float = EPS_PHASE, soften: float = 0.0,
                 block: int = 1 << 21):
        self.order, self.eps, self.soften = order, eps, soften
        self.nodes, self.weights = sphere_rule(order)
        self.rows_per_block = max(1, block // len(self.nodes))

    def evaluate_unitaries(self, us) -> tuple[np.ndarray, np.ndarray]:
        """Values and undefined-node counts for a stack of 4x4 unitaries."""
        us = np.asarray(us, dtype=complex).reshape(-1, 4, 4)
        t1, t2 = (t[:, :2] for t in transfer_tensors(us))
        n = len(self.nodes)
        totals = [[] for _ in us]
        bad = np.zeros(len(us), dtype=np.int64)
        step = max(1, self.rows_per_block // len(us))
        for start in range(0, n, step):
            rows = self.nodes[start:start + step]
            m1 = _grid_projections(t1, rows, self.nodes)
            m2 = _grid_projections(t2, rows, self.nodes)
            f, _, _ = fidelity_from_components(m1[:, 0], m1[:, 1], m2[:, 0], m2[:, 1], self.eps, self.soften)
            undefined = np.isnan(f)
            bad += undefined.sum(axis=(1, 2))
            w = np.outer(self.weights[start:start + step], self.weights)
            part = np.where(undefined, 0.0, f) * w
            for p in range(len(us)):
                totals[p].append(float(part[p].sum()))
        return np.array([math.fsum(t) for t in totals]), bad

    def __call__(self, params: ParamsLike) -> float:
        return float(self.evaluate_unitaries(u_g(params))[0][0])

    def values(self, xs) -> np.ndarray:
        return self.evaluate_unitaries(u_g_batch(xs))[0]

    def gradient(self, params: ParamsLike, h: float = 1e-4) -> np.ndarray:
        """Central finite differences in all 8 angles."""
        if not 1e-6 <= h <= 1e-3:
            raise InvalidInputError(f"finite-difference step h={h} outside [1e-6, 1e-3]")
        x = _angles(params)
        shifts = np.concatenate([np.eye(8) * h, -np.eye(8) * h])
        v = self.values(x + shifts)
        return (v[:8] - v[8:]) / (2 * h)

    def value_and_gradient(self, x, h: float = 1e-5) -> tuple[float, np.ndarray]:
        """Value and gradient for ascent.

        The gradient is exact on the grid with respect to the transfer
        tensors (one adjoint contraction); only the 4x4 tensors themselves are
        differenced in the angles, which is far cheaper than differencing the
        whole grid sum.
        """
        x = _angles(x)
        shifts = np.concatenate([np.zeros((1, 8)), np.eye(8) * h, -np.eye(8) * h])
        t1, t2 = (t[:, :2] for t in transfer_tensors(u_g_batch(x + shifts)))
        value, g1, g2 = self._value_and_tensor_gradient(t1[0], t2[0])
        grad = (np.einsum("kab,pkab->p", g1, t1[1:9] - t1[9:])
                + np.einsum("kab,pkab->p", g2, t2[1:9] - t2[9:])) / (2 * h)
        return value, grad

    def _value_and_tensor_gradient(self, t1, t2):
        v, w = self.nodes, self.weights
        m1 = np.einsum("ia,kab,jb->kij", v, t1, v, optimize=True)
        m2 = np.einsum("ia,kab,jb->kij", v, t2, v, optimize=True)
        x1, y1, x2, y2 = m1[0], m1[1], m2[0], m2[1]
        d2 = self.soften**2
        a = x1 * x1 + y1 * y1 + d2
        b = x2 * x2 + y2 * y2 + d2
        inv = 1.0 / np.sqrt(a * b)
        if self.soften <= 0:
            ok = (a > self.eps**2) & (b > self.eps**2)
            inv = np.where(ok, inv, 0.0)
            a, b = np.where(ok, a, 1.0), np.where(ok, b, 1.0)
        ww = np.outer(w, w)
        f = (x1 * x2 + y1 * y2) * inv
        value = float(np.sum(f * ww))
        # dF/dm, weighted, pulled back through the bilinear form
        c1 = np.stack([(x2 * inv - f * x1 / a) * ww, (y2 * inv - f * y1 / a) * ww])
        c2 = np.stack([(x1 * inv - f * x2 / b) * ww, (y1 * inv - f * y2 / b) * ww])
        g1 = np.einsum("ia,kij,jb->kab", v, c1, v, optimize=True)
        g2 = np.einsum("ia,kij,jb->kab", v, c2, v, optimize=True)
        return value, g1, g2


def mean_psf_quadrature(params: ParamsLike, order: int = DEFAULT_ORDER, eps: float = EPS_PHASE) -> MeanPsfEstimate:
    obj = QuadratureObjective(order, eps)
    value, bad = obj.evaluate_unitaries(u_g(params))
    return MeanPsfEstimate(float(value[0]), 0.0, int(bad[0]), len(obj.nodes) ** 2)


def grad_mean_psf(params: ParamsLike, method: str = "central_fd", h: float = 1e-4,
                  order: int = DEFAULT_ORDER, eps: float = EPS_PHASE) -> np.ndarray:
    if method != "central_fd":
        raise InvalidInputError(f"unknown gradient method {method!r}")
    return QuadratureObjective(order, eps).gradient(params, h)


def psf_samples(params: ParamsLike, rng: np.random.Generator, n: int, eps: float = EPS_PHASE):
    """Sample ``n`` uniform pure product inputs and return the output projections.

    Returns ``(m1, m2)`` with shape (n, 2) each.
    """
    t1, t2 = transfer_tensors(u_g(params))
    th1, th2, ph1, ph2 = sample_angles(rng, n)
    v1, v2 = bloch_inputs(th1, ph1), bloch_inputs(th2, ph2)
    return output_bloch_pairs(t1[:2], v1, v2), output_bloch_pairs(t2[:2], v1, v2)


def mean_psf_montecarlo(params: ParamsLike, n_samples: int, seed: int = 0, eps: float = EPS_PHASE,
                        workers: int = 1, shard_size: int = SHARD_SIZE) -> MeanPsfEstimate:
    if n_samples < 1:
        raise InvalidInputError("n_samples must be >= 1")
    u = u_g(params)

    def shard(rng, size, _):
        t1, t2 = transfer_tensors(u)
        th1, th2, ph1, ph2 = sample_angles(rng, size)
        v1, v2 = bloch_inputs(th1, ph1), bloch_inputs(th2, ph2)
        f, _, _ = phase_fidelity_batch(output_bloch_pairs(t1[:2], v1, v2),
                                       output_bloch_pairs(t2[:2], v1, v2), eps)
        ok = ~np.isnan(f)
        return float(f[ok].sum()), float((f[ok] ** 2).sum()), int(ok.sum()), size

    parts = map_shards(shard, seed, n_samples, workers, shard_size)
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    n_ok = sum(p[2] for p in parts)
    if n_ok == 0:
        return MeanPsfEstimate(float("nan"), float("nan"), n_samples, n_samples)
    mean = s1 / n_ok
    var = max(s2 / n_ok - mean**2, 0.0) * n_ok / max(n_ok - 1, 1)
    return MeanPsfEstimate(mean, math.sqrt(var / n_ok), n_samples - n_ok, n_samples)
