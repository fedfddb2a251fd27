"""Experiment runners behind the command-line interface.

Every runner takes an :class:`ExperimentConfig` and returns a
:class:`~qpsync.records.Table` whose metadata echoes the resolved config.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .average import mean_psf_montecarlo, mean_psf_quadrature, grad_mean_psf
from .closedform import (bloch_after_uc, equatorial_after_umax, m1x_expansion, m2y_expansion,
                         proof_state_catalog)
from .errors import InvalidInputError
from .gates import (PARAM_NAMES, U_MAX, CircuitParams, blank_sync_circuit, bloch_rotation,
                    local_gates, u_c, u_g)
from .linalg import tensor_product
from .optimize import (maximize_mean_psf, quarter_residuals, theorem1_witness,
                       undefined_fraction_scan)
from .psf import (EPS_PHASE, bloch_inputs, concurrence, output_bloch_pairs,
                  pairwise_phase_fidelities, phase_fidelity_batch, psf, relative_phase_batch,
                  transfer_tensors)
from .records import Table
from .sampling import map_shards, sample_angles, shard_rng
from .states import (PureAngles, equatorial_state, mixed_state, pure_state,
                     reduced_bloch_vectors)

COMMANDS = ("optimize", "mean-psf", "distributions", "latitude-sweep", "concurrence-scan",
            "verify", "witness")


@dataclass(frozen=True)
class ExperimentConfig:
    command: str = "verify"
    seed: int = 0
    n_samples: int = 1_000_000
    quad_order: int = 24
    eps_phase: float = EPS_PHASE
    params: Optional[CircuitParams] = None
    output_path: Optional[str] = None
    format: str = "csv"
    restarts: int = 50
    minimize: bool = False
    phase_bins: int = 180
    fidelity_bins: int = 100
    raw: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InvalidInputError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise InvalidInputError(f"format must be csv or json, got {self.format!r}")
        if self.n_samples < 1 or self.quad_order < 4 or self.restarts < 1:
            raise InvalidInputError("samples, restarts must be >= 1 and quad order >= 4")
        if not self.eps_phase > 0:
            raise InvalidInputError("eps_phase must be positive")

    @property
    def circuit(self) -> CircuitParams:
        return self.params if self.params is not None else U_MAX

    def resolved(self) -> dict:
        d = asdict(self)
        d["params"] = list(self.circuit.as_array().tolist())
        return d

    @classmethod
    def from_mapping(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if d.get("params") is not None and not isinstance(d["params"], CircuitParams):
            d["params"] = parse_params(d["params"])
        return cls(**d)


def parse_params(value) -> CircuitParams:
    """Eight comma-separated radians (or a sequence) in the order of ``PARAM_NAMES``."""
    if isinstance(value, str):
        try:
            value = [float(v) for v in value.split(",")]
        except ValueError as exc:
            raise InvalidInputError(f"bad --params value {value!r}") from exc
    return CircuitParams.from_array(value)


def load_config(path) -> dict:
    try:
        d = json.loads(Path(path).read_text())
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise InvalidInputError(f"config {path} must hold a JSON object")
    return d


def _table(config: ExperimentConfig, columns, rows, **extra) -> Table:
    meta = {"config": config.resolved(), "version": __version__}
    meta.update(extra)
    return Table(list(columns), rows, meta)


# ---------------------------------------------------------------------------
# distributions

def _sample_outputs(params, seed, n, eps, fn, workers=1):
    t1, t2 = transfer_tensors(u_g(params))

    def shard(rng, size, index):
        th1, th2, ph1, ph2 = sample_angles(rng, size)
        v1, v2 = bloch_inputs(th1, ph1), bloch_inputs(th2, ph2)
        m1 = output_bloch_pairs(t1[:2], v1, v2)
        m2 = output_bloch_pairs(t2[:2], v1, v2)
        return fn(m1, m2, index)

    return map_shards(shard, seed, n, workers)


def phase_histograms(params, n: int, seed: int, eps: float = EPS_PHASE, phase_bins: int = 180,
                     fidelity_bins: int = 100, workers: int = 1):
    """Normalized histograms of the output relative phase and of the PSF.

    Returns ``(phase_edges, phase_density, fid_edges, fid_density, n_undefined)``;
    densities sum to one over defined samples.
    """
    pe = np.linspace(-math.pi, math.pi, phase_bins + 1)
    fe = np.linspace(-1.0, 1.0, fidelity_bins + 1)

    def counts(m1, m2, _):
        d = relative_phase_batch(m1, m2, eps)
        f = phase_fidelity_batch(m1, m2, eps)[0]
        ok = ~np.isnan(d)
        return (np.histogram(d[ok], pe)[0], np.histogram(f[ok], fe)[0], int((~ok).sum()))

    parts = _sample_outputs(params, seed, n, eps, counts, workers)
    pc = np.sum([p[0] for p in parts], axis=0)
    fc = np.sum([p[1] for p in parts], axis=0)
    bad = sum(p[2] for p in parts)
    return pe, pc / pc.sum(), fe, fc / fc.sum(), bad


def asymmetry(density: np.ndarray) -> float:
    """``sum |P(b) - P(-b)| / sum P(b)`` for bins symmetric about zero."""
    return float(np.abs(density - density[::-1]).sum() / density.sum())


def side_maxima(edges: np.ndarray, density: np.ndarray) -> tuple[float, float]:
    """Bin centers of the densest bin on the positive and on the negative side."""
    centers = 0.5 * (edges[:-1] + edges[1:])
    pos, neg = centers > 0, centers < 0
    return float(centers[pos][np.argmax(density[pos])]), float(centers[neg][np.argmax(density[neg])])


def run_distributions(config: ExperimentConfig, workers: int = 1) -> Table:
    pe, pd, fe, fd, bad = phase_histograms(config.circuit, config.n_samples, config.seed,
                                           config.eps_phase, config.phase_bins,
                                           config.fidelity_bins, workers)
    rows = [["relative_phase", float(lo), float(hi), float(p)] for lo, hi, p in zip(pe[:-1], pe[1:], pd)]
    rows += [["psf", float(lo), float(hi), float(p)] for lo, hi, p in zip(fe[:-1], fe[1:], fd)]
    centers = 0.5 * (pe[:-1] + pe[1:])
    return _table(config, ["quantity", "bin_lo", "bin_hi", "density"], rows,
                  density="normalized: bins of each quantity sum to 1",
                  n_undefined=bad, phase_asymmetry=asymmetry(pd),
                  phase_min_bin_center=float(centers[np.argmin(pd)]))


def raw_samples(config: ExperimentConfig, workers: int = 1) -> Table:
    def take(m1, m2, _):
        d = relative_phase_batch(m1, m2, config.eps_phase)
        f = phase_fidelity_batch(m1, m2, config.eps_phase)[0]
        return d, f

    parts = _sample_outputs(config.circuit, config.seed, config.n_samples, config.eps_phase, take, workers)
    d = np.concatenate([p[0] for p in parts])
    f = np.concatenate([p[1] for p in parts])
    return _table(config, ["relative_phase", "psf"], [[float(a), float(b)] for a, b in zip(d, f)])


# ---------------------------------------------------------------------------
# latitude sweep

def default_theta_grid(n: int = 33) -> np.ndarray:
    return np.linspace(0.0, math.pi, n)


def default_dphi_grid(n: int = 64) -> np.ndarray:
    return np.linspace(-math.pi, math.pi, n, endpoint=False)


def latitude_matrix(params, theta_grid, dphi_grid, r1: float = 1.0, r2: float = 1.0,
                    eps: float = EPS_PHASE) -> np.ndarray:
    """PSF at equal latitudes, ``phi1 = 0`` and ``phi2 = dphi``; NaN where undefined."""
    theta_grid, dphi_grid = np.asarray(theta_grid, float), np.asarray(dphi_grid, float)
    if theta_grid.size == 0 or dphi_grid.size == 0:
        raise InvalidInputError("latitude sweep grids must be nonempty")
    th, dp = np.meshgrid(theta_grid, dphi_grid, indexing="ij")
    t1, t2 = transfer_tensors(u_g(params))
    v1 = bloch_inputs(th.ravel(), 0.0, r1)
    v2 = bloch_inputs(th.ravel(), dp.ravel(), r2)
    f = phase_fidelity_batch(output_bloch_pairs(t1[:2], v1, v2), output_bloch_pairs(t2[:2], v1, v2), eps)[0]
    return f.reshape(th.shape)


def row_minima(matrix: np.ndarray) -> np.ndarray:
    """Minimum over each row's defined cells; NaN for rows with none."""
    out = np.full(len(matrix), np.nan)
    for i, row in enumerate(matrix):
        ok = ~np.isnan(row)
        if ok.any():
            out[i] = row[ok].min()
    return out


def minima_nonincreasing_from(theta_grid, minima, center: float = math.pi / 2, tol: float = 1e-12) -> bool:
    """Row minima never rise when moving away from ``center`` on either side."""
    theta_grid = np.asarray(theta_grid)
    for side in (theta_grid >= center, theta_grid <= center):
        idx = np.where(side)[0]
        idx = idx[np.argsort(np.abs(theta_grid[idx] - center))]
        vals = [minima[i] for i in idx if not np.isnan(minima[i])]
        if any(b > a + tol for a, b in zip(vals, vals[1:])):
            return False
    return True


def equator_row_error(row, dphi_grid) -> tuple[float, bool]:
    """Max ``|F - 1|`` over defined cells of the equatorial row, and whether the
    undefined cells are exactly those at ``dphi = pi/2`` (mod 2pi).

    For pure equatorial inputs the U_MAX output is maximally entangled at
    ``dphi = pi/2``, so both reduced phases vanish there.
    """
    row, dphi_grid = np.asarray(row), np.asarray(dphi_grid)
    undefined = np.isnan(row)
    at_quarter = np.abs(np.angle(np.exp(1j * (dphi_grid - math.pi / 2)))) < 1e-9
    err = float(np.abs(row[~undefined] - 1).max()) if (~undefined).any() else math.inf
    return err, bool(np.array_equal(undefined, at_quarter))


def run_latitude_sweep(config: ExperimentConfig, theta_grid=None, dphi_grid=None,
                       r1: float = 1.0, r2: float = 1.0) -> Table:
    theta_grid = default_theta_grid() if theta_grid is None else np.asarray(theta_grid, float)
    dphi_grid = default_dphi_grid() if dphi_grid is None else np.asarray(dphi_grid, float)
    m = latitude_matrix(config.circuit, theta_grid, dphi_grid, r1, r2, config.eps_phase)
    rows = [[float(t), float(d), float(m[i, j])]
            for i, t in enumerate(theta_grid) for j, d in enumerate(dphi_grid)]
    return _table(config, ["theta", "dphi", "psf"], rows, purities=[r1, r2], phi1=0.0)


# ---------------------------------------------------------------------------
# concurrence

def equatorial_concurrence(params, phi1: float, phi2: float) -> float:
    psi = np.kron(_ket_eq(phi1), _ket_eq(phi2))
    out = u_g(params) @ psi
    return concurrence(np.outer(out, out.conj()))


def _ket_eq(phi: float) -> np.ndarray:
    return np.array([1.0, np.exp(1j * phi)]) / math.sqrt(2)


def concurrence_formula(dphi):
    """Concurrence of the U_MAX output for pure equatorial inputs with ``dphi = phi2 - phi1``.

    The orientation was fixed by probing phi1 = 0.3, phi2 = 1.4, where only
    ``sin(phi2 - phi1)`` reproduces the computed concurrence.
    """
    return (1 + np.sin(dphi)) / 2


def run_concurrence_scan(config: ExperimentConfig, dphi_grid=None) -> Table:
    dphi_grid = np.linspace(-math.pi, math.pi, 65) if dphi_grid is None else np.asarray(dphi_grid, float)
    rows = []
    for d in dphi_grid:
        c = equatorial_concurrence(config.circuit, 0.0, float(d))
        expected = float(concurrence_formula(d))
        rows.append([float(d), c, expected, abs(c - expected)])
    return _table(config, ["dphi", "concurrence", "formula", "abs_residual"], rows, phi1=0.0)


# ---------------------------------------------------------------------------
# mean PSF, optimization, witness

def run_mean_psf(config: ExperimentConfig, workers: int = 1) -> Table:
    p = config.circuit
    q = mean_psf_quadrature(p, config.quad_order, config.eps_phase)
    mc = mean_psf_montecarlo(p, config.n_samples, config.seed, config.eps_phase, workers)
    rows = [["quadrature", q.value, q.std_error, q.n_undefined, q.n_total],
            ["montecarlo", mc.value, mc.std_error, mc.n_undefined, mc.n_total]]
    return _table(config, ["method", "value", "std_error", "n_undefined", "n_total"], rows)


def run_optimize(config: ExperimentConfig, workers: int = 1) -> Table:
    res = maximize_mean_psf(restarts=config.restarts, seed=config.seed, minimize=config.minimize,
                            workers=workers)
    resid = quarter_residuals(res.best_params)
    rows = [["best_value", res.best_value], ["classification", res.classification.value],
            ["restarts", res.restarts_used], ["converged_restarts", res.n_converged],
            ["trajectory_len", res.trajectory_len]]
    rows += [[name, float(v)] for name, v in zip(PARAM_NAMES, res.best_params.as_array())]
    rows += [[f"{name}_residual", float(r)] for name, r in zip(PARAM_NAMES[:3], resid)]
    return _table(config, ["key", "value"], rows,
                  residuals="distance to the nearest odd multiple of pi/4, radians")


def run_witness(config: ExperimentConfig) -> tuple[Table, bool]:
    w = theorem1_witness(config.circuit, 8, eps=config.eps_phase)
    rows = [["found", w.found], ["source", w.source], ["psf", w.value], ["scanned", w.scanned]]
    rows += [[k, float(v)] for k, v in zip(("theta1", "theta2", "phi1", "phi2"), w.angles)]
    return _table(config, ["key", "value"], rows), w.found


# ---------------------------------------------------------------------------
# verification suite

@dataclass(frozen=True)
class CheckResult:
    name: str
    statistic: float
    threshold: float
    passed: bool


def _check(name, statistic, threshold, passed=None) -> CheckResult:
    statistic = float(statistic)
    ok = statistic <= threshold if passed is None else bool(passed)
    return CheckResult(name, statistic, float(threshold), ok)


def _matrix_bloch(theta1, theta2, phi1, phi2, u):
    rho = np.kron(pure_state(PureAngles(theta1, phi1)), pure_state(PureAngles(theta2, phi2)))
    out = u @ rho @ u.conj().T
    return [v.as_array() for v in reduced_bloch_vectors(out, 2)]


def run_verify_suite(config: ExperimentConfig, uc: Callable = u_c, budget: int = 200) -> list[CheckResult]:
    """Run all invariant checks with small budgets.

    ``uc`` builds the entangling core used by the closed-form comparisons; a
    deliberately broken builder serves as a negative control.
    """
    rng = shard_rng(config.seed, 0)
    two_pi = 2 * math.pi
    checks: list[CheckResult] = []
    eps = config.eps_phase

    # mean PSF of the bare core vanishes
    worst = max(abs(mean_psf_quadrature(np.r_[rng.uniform(0, two_pi, 3), np.zeros(5)], config.quad_order).value)
                for _ in range(5))
    checks.append(_check("core-mean-psf-zero", worst, 1e-8))
    q = mean_psf_quadrature(U_MAX, config.quad_order).value
    checks.append(_check("umax-mean-psf", abs(q - 0.349), 0.002))
    g = max(np.abs(grad_mean_psf(p, h=1e-4, order=config.quad_order)).max()
            for p in (U_MAX, U_MAX.replace(sigma1=math.pi)))
    checks.append(_check("extremum-gradient", g, 1e-5))
    mc = mean_psf_montecarlo(U_MAX, min(config.n_samples, 200_000), config.seed, eps)
    checks.append(_check("quadrature-vs-montecarlo", abs(mc.value - q) / mc.std_error, 4.0))

    # equatorial inputs under U_MAX
    u = u_g(U_MAX)
    err_f = err_v = 0.0
    for _ in range(budget):
        r1, r2 = rng.uniform(0.01, 1.0, 2)
        f1, f2 = rng.uniform(0, two_pi, 2)
        rho = np.kron(equatorial_state(r1, f1), equatorial_state(r2, f2))
        val = psf(rho, u, eps)
        err_f = max(err_f, abs(val.value - 1) if val.defined else math.inf)
        out = u @ rho @ u.conj().T
        got = reduced_bloch_vectors(out, 2)
        exp = equatorial_after_umax(r1, r2, f1, f2)
        err_v = max(err_v, *(np.abs(np.array(a) - np.array(b)).max() for a, b in zip(got, exp)))
    checks.append(_check("equatorial-perfect-sync", err_f, 1e-10))
    checks.append(_check("equatorial-closed-form", err_v, 1e-10))
    err = 0.0
    for _ in range(budget):
        f1, f2 = rng.uniform(0, two_pi, 2)
        err = max(err, abs(equatorial_concurrence(U_MAX, f1, f2) - concurrence_formula(f2 - f1)))
    checks.append(_check("concurrence-encoding", err, 1e-10))

    # known-blank synchronization
    err, undefined_ok = 0.0, True
    for n in (2, 3):
        circ = blank_sync_circuit(n)
        blank = pure_state(PureAngles(0.0))
        for _ in range(budget // 4):
            th = rng.uniform(0, math.pi)
            if abs(th - math.pi / 2) < 0.01:
                continue
            rho = tensor_product(mixed_state(PureAngles(th, rng.uniform(0, two_pi)), rng.uniform(0.05, 1)),
                                 *([blank] * (n - 1)))
            out = circ @ rho @ circ.conj().T
            for v in pairwise_phase_fidelities(out, n, eps).values():
                err = max(err, abs(v.value - 1) if v.defined else math.inf)
        rho = tensor_product(pure_state(PureAngles(math.pi / 2, 0.7)), *([blank] * (n - 1)))
        out = circ @ rho @ circ.conj().T
        undefined_ok &= all(not v.defined for v in pairwise_phase_fidelities(out, n, eps).values())
    checks.append(_check("blank-sync", err, 1e-10))
    checks.append(_check("blank-sync-equator-undefined", 0.0 if undefined_ok else 1.0, 0.0))

    # closed forms against the matrix path
    err_a = err_b = 0.0
    for _ in range(budget):
        t1, t2 = rng.uniform(0, math.pi, 2)
        f1, f2 = rng.uniform(0, two_pi, 2)
        x = rng.uniform(0, two_pi, 8)
        n1, n2 = _matrix_bloch(t1, t2, f1, f2, uc(*x[:3]))
        a1, a2 = bloch_after_uc(t1, t2, f1, f2, *x[:3])
        err_a = max(err_a, np.abs(n1 - np.array(a1)).max(), np.abs(n2 - np.array(a2)).max())
        w1, w2 = local_gates(x)
        m1, m2 = _matrix_bloch(t1, t2, f1, f2, tensor_product(w1, w2) @ uc(*x[:3]))
        err_b = max(err_b, abs(m1[0] - m1x_expansion(t1, t2, f1, f2, x)),
                    abs(m2[1] - m2y_expansion(t1, t2, f1, f2, x)))
    checks.append(_check("core-closed-form", err_a, 1e-10))
    checks.append(_check("trig-expansions", err_b, 1e-10))
    draws = rng.uniform(0, two_pi, (20, 3))
    for fx in proof_state_catalog():
        err = 0.0
        for a, b, c in draws:
            n1, n2 = _matrix_bloch(*fx.angles(a, b, c), uc(a, b, c))
            e1, e2 = fx.expected_vectors(a, b, c)
            err = max(err, np.abs(n1 - np.array(e1)).max(), np.abs(n2 - np.array(e2)).max())
        checks.append(_check(f"proof-state-{fx.id:02d}", err, 1e-10))

    # local rotations act on the reduced Bloch vectors directly
    err = 0.0
    for _ in range(budget // 4):
        x = rng.uniform(0, two_pi, 8)
        t1, t2 = rng.uniform(0, math.pi, 2)
        f1, f2 = rng.uniform(0, two_pi, 2)
        w1, w2 = local_gates(x)
        n1, n2 = _matrix_bloch(t1, t2, f1, f2, u_c(*x[:3]))
        m1, m2 = _matrix_bloch(t1, t2, f1, f2, u_g(x))
        err = max(err, np.abs(bloch_rotation(w1) @ n1 - m1).max(), np.abs(bloch_rotation(w2) @ n2 - m2).max())
    checks.append(_check("local-rotations-on-bloch", err, 1e-10))

    # impossibility of perfect synchronization and the undefined set
    misses = sum(not theorem1_witness(rng.uniform(0, two_pi, 8), 8, eps=eps).found for _ in range(budget // 4))
    checks.append(_check("imperfect-sync-witness", misses, 0))
    n_scan = min(config.n_samples, 200_000)
    fr = undefined_fraction_scan(U_MAX, n_scan, [1e-2, 1e-4, 1e-6], config.seed)
    mono = fr[1e-2] >= fr[1e-4] >= fr[1e-6]
    checks.append(_check("undefined-fraction", fr[1e-6], 1e-3, fr[1e-6] <= 1e-3 and mono))

    # distribution and latitude shape
    pe, pd, *_ = phase_histograms(U_MAX, config.n_samples, config.seed, eps, config.phase_bins)
    checks.append(_check("phase-histogram-asymmetry", asymmetry(pd), 0.02))
    centers = 0.5 * (pe[:-1] + pe[1:])
    checks.append(_check("phase-histogram-minimum-at-pi",
                         math.pi - abs(centers[np.argmin(pd)]), math.radians(10)))
    hi, lo = side_maxima(pe, pd)
    q = math.pi / 4
    checks.append(_check("phase-histogram-maxima", 0.0 if (q < hi < 3 * q and -3 * q < lo < -q) else 1.0, 0.0))
    th = default_theta_grid()
    m = latitude_matrix(U_MAX, th, default_dphi_grid(), eps=eps)
    eq = int(np.argmin(np.abs(th - math.pi / 2)))
    err, only_expected = equator_row_error(m[eq], default_dphi_grid())
    checks.append(_check("equator-row-perfect", err, 1e-10, err <= 1e-10 and only_expected))
    checks.append(_check("latitude-degradation", 0.0 if minima_nonincreasing_from(th, row_minima(m)) else 1.0, 0.0))
    return checks


def verify_table(config: ExperimentConfig, checks: list[CheckResult]) -> Table:
    rows = [[c.name, c.statistic, c.threshold, c.passed] for c in checks]
    return _table(config, ["check", "statistic", "threshold", "passed"], rows,
                  all_passed=all(c.passed for c in checks))
