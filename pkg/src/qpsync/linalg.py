"""Small dense complex-matrix kernel.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Qubit 0 is the
leftmost tensor factor (the slow index of the Kronecker product), so a CNOT
with control 0 and target 1 acts as ``|10> -> |11>``.
"""
from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from .errors import InvalidInputError

TOL = 1e-12


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def is_unitary(m: np.ndarray, tol: float = TOL) -> bool:
    m = as_matrix(m)
    return float(np.max(np.abs(dagger(m) @ m - np.eye(len(m))))) <= tol


def is_hermitian(m: np.ndarray, tol: float = TOL) -> bool:
    m = as_matrix(m)
    return float(np.max(np.abs(m - dagger(m)))) <= tol


def tensor_product(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor is the slowest index."""
    if not factors:
        raise InvalidInputError("tensor_product needs at least one factor")
    return reduce(np.kron, (as_matrix(f) for f in factors))


def mat_mul_chain(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Left-to-right product ``factors[0] @ factors[1] @ ...``."""
    if len(factors) == 0:
        raise InvalidInputError("empty product")
    mats = [as_matrix(f) for f in factors]
    dim = mats[0].shape[0]
    for f in mats[1:]:
        if f.shape[0] != dim:
            raise InvalidInputError(f"dimension mismatch: {dim} vs {f.shape[0]}")
    return reduce(np.matmul, mats)


def partial_trace(rho: np.ndarray, keep: Sequence[int], n_qubits: int) -> np.ndarray:
    """Reduced density matrix on the qubits listed in ``keep`` (0-based).

    ``keep`` must be nonempty and strictly increasing. The kept qubits stay in
    their original order.
    """
    rho = as_matrix(rho)
    if n_qubits < 1 or rho.shape[0] != 2**n_qubits:
        raise InvalidInputError(f"matrix of dim {rho.shape[0]} is not a {n_qubits}-qubit operator")
    keep = list(keep)
    if not keep or any(b <= a for a, b in zip(keep, keep[1:])):
        raise InvalidInputError(f"keep must be nonempty and strictly increasing, got {keep}")
    if keep[0] < 0 or keep[-1] >= n_qubits:
        raise InvalidInputError(f"keep indices {keep} out of range for {n_qubits} qubits")

    traced = [q for q in range(n_qubits) if q not in keep]
    t = rho.reshape([2] * (2 * n_qubits))
    # bring kept row indices, kept column indices, then traced pairs to the front
    order = keep + [q + n_qubits for q in keep] + traced + [q + n_qubits for q in traced]
    t = np.transpose(t, order)
    k = 2 ** len(keep)
    r = 2 ** len(traced)
    t = t.reshape(k, k, r, r)
    return np.trace(t, axis1=2, axis2=3)
