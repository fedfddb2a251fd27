"""Gate and circuit constructors.

Written products apply right to left: in ``A @ B`` the gate ``B`` acts first.
"""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields
from typing import Sequence, Union

import numpy as np

from .errors import InvalidInputError
from .linalg import mat_mul_chain, tensor_product
from .states import I2, PAULIS, TWO_PI

X_AXIS = (1.0, 0.0, 0.0)
Y_AXIS = (0.0, 1.0, 0.0)
Z_AXIS = (0.0, 0.0, 1.0)

PARAM_NAMES = ("alpha", "beta", "gamma", "mu1", "mu2", "nu1", "nu2", "sigma1")


@dataclass(frozen=True)
class CircuitParams:
    """The eight angles of the search family, each stored modulo 2pi.

    ``alpha, beta, gamma`` parameterize the entangling core; the rest are the
    final local rotations ``Rz(sigma1) Ry(nu1) Rz(mu1)`` on qubit 0 and
    ``Ry(nu2) Rz(mu2)`` on qubit 1.
    """

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    mu1: float = 0.0
    mu2: float = 0.0
    nu1: float = 0.0
    nu2: float = 0.0
    sigma1: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = float(getattr(self, f.name))
            if not math.isfinite(v):
                raise InvalidInputError(f"{f.name} must be finite, got {v}")
            v = v % TWO_PI
            # fold values that round up to 2pi back onto 0
            object.__setattr__(self, f.name, 0.0 if v >= TWO_PI else v)

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "CircuitParams":
        values = list(values)
        if len(values) != 8:
            raise InvalidInputError(f"expected 8 circuit angles, got {len(values)}")
        return cls(*values)

    def replace(self, **changes) -> "CircuitParams":
        d = dict(zip(PARAM_NAMES, astuple(self)))
        d.update(changes)
        return CircuitParams(**d)


U_MAX = CircuitParams(alpha=3 * math.pi / 4, beta=math.pi / 4, gamma=math.pi / 4, mu1=math.pi / 2)

ParamsLike = Union[CircuitParams, Sequence[float], np.ndarray]


def _unit_axis(axis) -> np.ndarray:
    n = np.asarray(axis, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-9:
        raise InvalidInputError(f"rotation axis must be a unit 3-vector, got {axis}")
    return n


def rotation(axis, angle: float) -> np.ndarray:
    """``exp(-i angle/2 n.sigma)``."""
    n = _unit_axis(axis)
    gen = n[0] * PAULIS[0] + n[1] * PAULIS[1] + n[2] * PAULIS[2]
    return math.cos(angle / 2) * I2 - 1j * math.sin(angle / 2) * gen


def rz(angle: float) -> np.ndarray:
    return rotation(Z_AXIS, angle)


def ry(angle: float) -> np.ndarray:
    return rotation(Y_AXIS, angle)


def bloch_rotation(u2: np.ndarray) -> np.ndarray:
    """3x3 orthogonal matrix by which ``u2`` conjugation rotates Bloch vectors."""
    u2 = np.asarray(u2, dtype=complex)
    ud = u2.conj().T
    return np.array([[0.5 * np.trace(sk @ u2 @ sl @ ud).real for sl in PAULIS] for sk in PAULIS])


def cnot(control: int, target: int, n_qubits: int = 2) -> np.ndarray:
    """CNOT on ``n_qubits`` qubits (0-based indices, qubit 0 leftmost)."""
    if control == target:
        raise InvalidInputError("control and target must differ")
    for q in (control, target):
        if not 0 <= q < n_qubits:
            raise InvalidInputError(f"qubit {q} out of range for {n_qubits} qubits")
    dim = 2**n_qubits
    m = np.zeros((dim, dim), dtype=complex)
    cbit = 1 << (n_qubits - 1 - control)
    tbit = 1 << (n_qubits - 1 - target)
    for i in range(dim):
        j = i ^ tbit if i & cbit else i
        m[j, i] = 1.0
    return m


C01 = cnot(0, 1)
C10 = cnot(1, 0)
SWAP = C10 @ C01 @ C10


def u_c(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Three-CNOT entangling core
    ``C21 (1 x Ry(beta)) C12 (Rz(gamma) x Ry(alpha)) C21``."""
    return mat_mul_chain([
        C10,
        tensor_product(I2, ry(beta)),
        C01,
        tensor_product(rz(gamma), ry(alpha)),
        C10,
    ])


def _angles(params: ParamsLike) -> np.ndarray:
    if isinstance(params, CircuitParams):
        return params.as_array()
    a = np.asarray(params, dtype=float)
    if a.shape != (8,):
        raise InvalidInputError(f"expected 8 circuit angles, got shape {a.shape}")
    return a


def local_gates(params: ParamsLike) -> tuple[np.ndarray, np.ndarray]:
    """Final single-qubit gates ``(W1, W2)`` of the search family."""
    _, _, _, mu1, mu2, nu1, nu2, sigma1 = _angles(params)
    return rz(sigma1) @ ry(nu1) @ rz(mu1), ry(nu2) @ rz(mu2)


def u_g(params: ParamsLike) -> np.ndarray:
    """Full eight-angle circuit ``(W1 x W2) U_c``.

    Accepts a :class:`CircuitParams` or a raw length-8 sequence; raw angles
    are used as given (no reduction modulo 2pi).
    """
    a = _angles(params)
    w1, w2 = local_gates(a)
    return tensor_product(w1, w2) @ u_c(*a[:3])


def blank_sync_circuit(n_qubits: int = 2, axis=Y_AXIS, angle: float = math.pi / 2) -> np.ndarray:
    """CNOT fan-out from qubit 0 followed by the same rotation on every qubit.

    Rotations that leave the z axis fixed make every phase undefined; that is
    not checked here and shows up as an undefined fidelity downstream.
    """
    if n_qubits < 2:
        raise InvalidInputError("blank-state synchronization needs at least 2 qubits")
    fan_out = mat_mul_chain([cnot(0, t, n_qubits) for t in range(1, n_qubits)])
    r = rotation(axis, angle)
    return tensor_product(*([r] * n_qubits)) @ fan_out


def _ry_batch(a: np.ndarray) -> np.ndarray:
    c, s = np.cos(a / 2), np.sin(a / 2)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2).astype(complex)


def _rz_batch(a: np.ndarray) -> np.ndarray:
    out = np.zeros(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(-0.5j * a)
    out[..., 1, 1] = np.exp(0.5j * a)
    return out


def _kron_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("pij,pkl->pikjl", a, b).reshape(len(a), 4, 4)


def u_g_batch(xs) -> np.ndarray:
    """``u_g`` for a stack of raw angle vectors, shape (P, 8) -> (P, 4, 4)."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if xs.shape[1] != 8:
        raise InvalidInputError(f"expected rows of 8 circuit angles, got shape {xs.shape}")
    alpha, beta, gamma, mu1, mu2, nu1, nu2, sigma1 = xs.T
    eye = np.broadcast_to(I2, (len(xs), 2, 2))
    w1 = _rz_batch(sigma1) @ _ry_batch(nu1) @ _rz_batch(mu1)
    w2 = _ry_batch(nu2) @ _rz_batch(mu2)
    core = (C10 @ _kron_batch(eye, _ry_batch(beta)) @ C01
            @ _kron_batch(_rz_batch(gamma), _ry_batch(alpha)) @ C10)
    return _kron_batch(w1, w2) @ core
