"""Phase fidelity, phase-synchronization fidelity (PSF) and concurrence.

Two code paths live here. The scalar functions work on explicit density
matrices and partial traces. The ``*_batch`` helpers evaluate the same
quantities for many product inputs at once through the Pauli transfer tensor
of the circuit; they are what the integrators and scans use.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from .errors import InvalidInputError
from .linalg import as_matrix, is_unitary, partial_trace
from .states import I2, PAULIS, SIGMA_Y, bloch_vector

EPS_PHASE = 1e-9


@dataclass(frozen=True)
class PsfValue:
    """Fidelity value, or ``None`` when a projected Bloch norm is <= eps.

    ``m_norms`` always carries the two projected norms for diagnostics.
    """

    value: Optional[float]
    m_norms: tuple[float, float]

    @property
    def defined(self) -> bool:
        return self.value is not None


def phase_fidelity(rho1: np.ndarray, rho2: np.ndarray, eps: float = EPS_PHASE) -> PsfValue:
    m1 = bloch_vector(rho1).projection()
    m2 = bloch_vector(rho2).projection()
    norms = (m1.norm, m2.norm)
    if min(norms) <= eps:
        return PsfValue(None, norms)
    f = (m1.mx * m2.mx + m1.my * m2.my) / (norms[0] * norms[1])
    return PsfValue(max(-1.0, min(1.0, f)), norms)


def relative_phase(rho1: np.ndarray, rho2: np.ndarray, eps: float = EPS_PHASE) -> Optional[float]:
    """Signed angle in (-pi, pi] from the phase of ``rho1`` to that of ``rho2``."""
    m1 = bloch_vector(rho1).projection()
    m2 = bloch_vector(rho2).projection()
    if min(m1.norm, m2.norm) <= eps:
        return None
    cross = m1.mx * m2.my - m1.my * m2.mx
    dot = m1.mx * m2.mx + m1.my * m2.my
    angle = math.atan2(cross, dot)
    return math.pi if angle == -math.pi else angle


def evolve(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u @ rho @ u.conj().T


def psf(rho_in: np.ndarray, u: np.ndarray, eps: float = EPS_PHASE) -> PsfValue:
    """PSF of the two-qubit state ``rho_in`` under the unitary ``u``."""
    rho_in, u = as_matrix(rho_in), as_matrix(u)
    if rho_in.shape != (4, 4) or u.shape != (4, 4):
        raise InvalidInputError("psf expects 4x4 state and circuit")
    if not is_unitary(u, 1e-10):
        raise InvalidInputError("circuit is not unitary")
    out = evolve(rho_in, u)
    return phase_fidelity(partial_trace(out, [0], 2), partial_trace(out, [1], 2), eps)


def pairwise_phase_fidelities(rho: np.ndarray, n_qubits: int, eps: float = EPS_PHASE) -> dict:
    """``{(i, j): PsfValue}`` for every qubit pair of an n-qubit state."""
    marginals = [partial_trace(rho, [q], n_qubits) for q in range(n_qubits)]
    return {
        (i, j): phase_fidelity(marginals[i], marginals[j], eps)
        for i, j in combinations(range(n_qubits), 2)
    }


_YY = np.kron(SIGMA_Y, SIGMA_Y)


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    The values lambda_i (square roots of the eigenvalues of rho (Y x Y) rho* (Y x Y))
    are obtained as singular values of tau_ij = <v_i| Y x Y |v_j*> built from the
    subnormalized eigenvectors v_i of rho. This avoids taking square roots of
    rounding noise for rank-deficient states.
    """
    rho = as_matrix(rho)
    if rho.shape != (4, 4):
        raise InvalidInputError("concurrence expects a 4x4 density matrix")
    w, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    keep = w > 0
    v = vecs[:, keep] * np.sqrt(w[keep])
    if v.shape[1] == 0:
        return 0.0
    tau = v.conj().T @ _YY @ v.conj()
    lam = np.sort(np.linalg.svd(tau, compute_uv=False))[::-1]
    lam = np.concatenate([lam, np.zeros(4 - len(lam))])
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


# ---------------------------------------------------------------------------
# Vectorized evaluation for product inputs

_PAULI4 = np.stack([I2, *PAULIS])
_INPUT_BASIS = np.einsum("aij,bkl->abikjl", _PAULI4, _PAULI4).reshape(4, 4, 4, 4)
_OBS = (
    np.stack([np.kron(s, I2) for s in PAULIS]),
    np.stack([np.kron(I2, s) for s in PAULIS]),
)


def transfer_tensors(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear maps from input Bloch 4-vectors to output Bloch vectors.

    For ``rho_in = rho1 x rho2`` with ``v_i = (1, n_i)`` the output Bloch vector
    of qubit q is ``einsum('kab,a,b->k', T_q, v1, v2)``. Each ``T_q`` has shape
    (3, 4, 4) with entries ``tr((s_k on q) U (s_a x s_b) U^dag) / 4``.
    A stack of unitaries (P, 4, 4) gives tensors of shape (P, 3, 4, 4).
    """
    u = np.asarray(u, dtype=complex)
    ud = np.swapaxes(u.conj(), -1, -2)
    evolved = u[..., None, None, :, :] @ _INPUT_BASIS @ ud[..., None, None, :, :]
    t1 = np.einsum("kji,...abij->...kab", _OBS[0], evolved).real / 4
    t2 = np.einsum("kji,...abij->...kab", _OBS[1], evolved).real / 4
    return t1, t2


def bloch_inputs(theta, phi, r=1.0) -> np.ndarray:
    """Rows ``(1, r sin(theta) cos(phi), r sin(theta) sin(phi), r cos(theta))``."""
    theta, phi, r = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float), np.asarray(r, float))
    s = r * np.sin(theta)
    return np.stack([np.ones_like(s), s * np.cos(phi), s * np.sin(phi), r * np.cos(theta)], axis=-1)


def output_bloch_pairs(t: np.ndarray, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    """Output Bloch vectors for paired inputs ``(v1[n], v2[n])``; shape (N, 3)."""
    return np.einsum("na,kab,nb->nk", v1, t, v2, optimize=True)


def phase_fidelity_batch(m1: np.ndarray, m2: np.ndarray, eps: float = EPS_PHASE, soften: float = 0.0):
    """Vectorized phase fidelity from projections with last axis (mx, my).

    Returns ``(values, norm1, norm2)``; undefined entries are NaN. With
    ``soften > 0`` the smooth surrogate ``m1.m2 / sqrt((|m1|^2+s^2)(|m2|^2+s^2))``
    is returned instead and nothing is undefined.
    """
    return fidelity_from_components(m1[..., 0], m1[..., 1], m2[..., 0], m2[..., 1], eps, soften)


def fidelity_from_components(x1, y1, x2, y2, eps: float = EPS_PHASE, soften: float = 0.0):
    q1 = x1 * x1 + y1 * y1
    q2 = x2 * x2 + y2 * y2
    dot = x1 * x2 + y1 * y2
    n1, n2 = np.sqrt(q1), np.sqrt(q2)
    if soften > 0:
        return dot / np.sqrt((q1 + soften**2) * (q2 + soften**2)), n1, n2
    ok = (n1 > eps) & (n2 > eps)
    with np.errstate(invalid="ignore", divide="ignore"):
        f = dot / (n1 * n2)
    f[~ok] = np.nan
    return np.clip(f, -1.0, 1.0, out=f), n1, n2


def relative_phase_batch(m1: np.ndarray, m2: np.ndarray, eps: float = EPS_PHASE) -> np.ndarray:
    cross = m1[..., 0] * m2[..., 1] - m1[..., 1] * m2[..., 0]
    dot = m1[..., 0] * m2[..., 0] + m1[..., 1] * m2[..., 1]
    ang = np.arctan2(cross, dot)
    ang = np.where(ang == -np.pi, np.pi, ang)
    ok = (np.hypot(m1[..., 0], m1[..., 1]) > eps) & (np.hypot(m2[..., 0], m2[..., 1]) > eps)
    return np.where(ok, ang, np.nan)


def psf_batch(u: np.ndarray, theta1, theta2, phi1, phi2, r1=1.0, r2=1.0, eps: float = EPS_PHASE):
    """PSF for many product inputs (pure by default). Undefined entries are NaN."""
    t1, t2 = transfer_tensors(u)
    v1 = bloch_inputs(theta1, phi1, r1).reshape(-1, 4)
    v2 = bloch_inputs(theta2, phi2, r2).reshape(-1, 4)
    m1 = output_bloch_pairs(t1[:2], v1, v2)
    m2 = output_bloch_pairs(t2[:2], v1, v2)
    return phase_fidelity_batch(m1, m2, eps)[0]
