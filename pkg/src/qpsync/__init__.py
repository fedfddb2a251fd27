"""Phase synchronization of two qubits by unitary circuits: simulation and checks."""

__version__ = "0.1.0"

from .errors import InvalidInputError
from .gates import U_MAX, CircuitParams, u_c, u_g
from .psf import EPS_PHASE, PsfValue, concurrence, phase_fidelity, psf, relative_phase
from .average import MeanPsfEstimate, grad_mean_psf, mean_psf_montecarlo, mean_psf_quadrature
from .optimize import Classification, OptimizationResult, classify_extremum, maximize_mean_psf

__all__ = [
    "InvalidInputError", "U_MAX", "CircuitParams", "u_c", "u_g", "EPS_PHASE", "PsfValue",
    "concurrence", "phase_fidelity", "psf", "relative_phase", "MeanPsfEstimate",
    "grad_mean_psf", "mean_psf_montecarlo", "mean_psf_quadrature", "Classification",
    "OptimizationResult", "classify_extremum", "maximize_mean_psf",
]
