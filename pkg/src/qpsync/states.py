"""Single-qubit states, Bloch vectors and their phase projections."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError
from .linalg import TOL, as_matrix, is_hermitian, partial_trace

TWO_PI = 2.0 * math.pi

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


@dataclass(frozen=True)
class PureAngles:
    """Polar angle ``theta`` in [0, pi] and azimuth ``phi`` in [0, 2pi).

    At the poles the azimuth is a pure gauge and is stored as 0.
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        if not (-TOL <= theta <= math.pi + TOL):
            raise InvalidInputError(f"theta={theta} outside [0, pi]")
        theta = min(max(theta, 0.0), math.pi)
        phi = 0.0 if theta in (0.0, math.pi) else float(self.phi) % TWO_PI
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)


class PhaseProjection(NamedTuple):
    mx: float
    my: float

    @property
    def norm(self) -> float:
        return math.hypot(self.mx, self.my)


class BlochVector(NamedTuple):
    nx: float
    ny: float
    nz: float

    @property
    def norm(self) -> float:
        return math.sqrt(self.nx**2 + self.ny**2 + self.nz**2)

    def projection(self) -> PhaseProjection:
        return PhaseProjection(self.nx, self.ny)

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


def ket(angles: PureAngles) -> np.ndarray:
    """State vector cos(theta/2)|0> + exp(i phi) sin(theta/2)|1>."""
    return np.array(
        [math.cos(angles.theta / 2), np.exp(1j * angles.phi) * math.sin(angles.theta / 2)],
        dtype=complex,
    )


def pure_state(angles: PureAngles) -> np.ndarray:
    psi = ket(angles)
    return np.outer(psi, psi.conj())


def density_from_bloch(n) -> np.ndarray:
    nx, ny, nz = (float(c) for c in n)
    return 0.5 * (I2 + nx * SIGMA_X + ny * SIGMA_Y + nz * SIGMA_Z)


def mixed_state(angles: PureAngles, p: float) -> np.ndarray:
    """``(1 - p) I/2 + p |psi><psi|``."""
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"purity weight p={p} outside [0, 1]")
    return (1.0 - p) * I2 / 2 + p * pure_state(angles)


def equatorial_state(r: float, phi: float) -> np.ndarray:
    """State with Bloch vector ``r (cos phi, sin phi, 0)``."""
    if not 0.0 <= r <= 1.0:
        raise InvalidInputError(f"purity r={r} outside [0, 1]")
    return density_from_bloch((r * math.cos(phi), r * math.sin(phi), 0.0))


def bloch_vector(rho: np.ndarray) -> BlochVector:
    rho = as_matrix(rho)
    if rho.shape != (2, 2):
        raise InvalidInputError(f"expected a 2x2 density matrix, got {rho.shape}")
    if not is_hermitian(rho, 1e-10):
        raise InvalidInputError("density matrix is not Hermitian")
    return BlochVector(*(float(np.trace(s @ rho).real) for s in PAULIS))


def angles_from_bloch(n: BlochVector) -> PureAngles:
    """Inverse of the pure-state Bloch map for unit vectors."""
    theta = math.acos(max(-1.0, min(1.0, n.nz / n.norm)))
    return PureAngles(theta, math.atan2(n.ny, n.nx))


def reduced_bloch_vectors(rho: np.ndarray, n_qubits: int) -> list[BlochVector]:
    """Bloch vector of every single-qubit marginal of ``rho``."""
    return [bloch_vector(partial_trace(rho, [q], n_qubits)) for q in range(n_qubits)]
