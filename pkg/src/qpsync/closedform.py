"""Closed-form Bloch vectors used as oracles for the matrix simulation.

``bloch_after_uc`` gives both reduced Bloch vectors after the entangling core
for any pure product input. The proof-state catalog lists 26 special inputs
whose output vectors reduce to short trigonometric expressions; inputs that
sit at a pole carry azimuth 0, and azimuths that depend on the circuit are
stored as functions of ``(alpha, beta, gamma)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gates import ParamsLike, _angles
from .states import BlochVector

PI = math.pi
SQ2 = math.sqrt(2.0)
cos, sin = math.cos, math.sin


def bloch_after_uc(theta1, theta2, phi1, phi2, alpha, beta, gamma) -> tuple[BlochVector, BlochVector]:
    """Reduced Bloch vectors of both qubits after ``u_c(alpha, beta, gamma)``
    acting on ``pure(theta1, phi1) x pure(theta2, phi2)``."""
    ca, sa, cb, sb, cg, sg = cos(alpha), sin(alpha), cos(beta), sin(beta), cos(gamma), sin(gamma)
    ct1, st1, ct2, st2 = cos(theta1), sin(theta1), cos(theta2), sin(theta2)
    cf1, sf1, cf2, sf2 = cos(phi1), sin(phi1), cos(phi2), sin(phi2)
    n1 = BlochVector(
        cg * (ca * st2 * cf2 + sa * st1 * ct2 * cf1) - sg * (ca * ct1 * st2 * sf2 + sa * st1 * sf1),
        sg * (cb * ct1 * st2 * cf2 - sb * st1 * cf1) + cg * (cb * st2 * sf2 - sb * st1 * ct2 * sf1),
        ca * (cb * ct2 + sb * st1 * st2 * sf1 * sf2) - sa * (cb * st1 * st2 * cf1 * cf2 + sb * ct1),
    )
    n2 = BlochVector(
        cg * (cb * st1 * cf1 + sb * ct1 * st2 * cf2) - sg * (cb * st1 * ct2 * sf1 + sb * st2 * sf2),
        sg * (ca * st1 * ct2 * cf1 - sa * st2 * cf2) + cg * (ca * st1 * sf1 - sa * ct1 * st2 * sf2),
        ca * (cb * ct1 - sb * st1 * st2 * cf1 * cf2) + sa * (cb * st1 * st2 * sf1 * sf2 - sb * ct2),
    )
    return n1, n2


def equatorial_after_umax(r1, r2, phi1, phi2) -> tuple[BlochVector, BlochVector]:
    """Output Bloch vectors of ``U_MAX`` on equatorial inputs of purities r1, r2."""
    x = 0.5 * (r1 * cos(phi1) - r2 * sin(phi2))
    y = 0.5 * (-r1 * sin(phi1) - r2 * cos(phi2))
    z = 0.5 * r1 * r2 * cos(phi1 - phi2)
    return BlochVector(x, y, -z), BlochVector(x, y, z)


def _t_terms(theta1, theta2, phi1, phi2) -> np.ndarray:
    st1, ct1, st2, ct2 = sin(theta1), cos(theta1), sin(theta2), cos(theta2)
    sf1, cf1, sf2, cf2 = sin(phi1), cos(phi1), sin(phi2), cos(phi2)
    return np.array([
        st1 * sf1,
        ct1 * st2 * sf2,
        st1 * ct2 * cf1,
        st2 * cf2,
        st1 * cf1,
        ct1 * st2 * cf2,
        st1 * ct2 * sf1,
        st2 * sf2,
        ct1,
        st1 * st2 * cf1 * cf2,
        st1 * st2 * sf1 * sf2,
        ct2,
    ])


def _c_coeffs(alpha, beta, gamma, a, b, c) -> np.ndarray:
    sa, ca, sb, cb, sg, cg = sin(alpha), cos(alpha), sin(beta), cos(beta), sin(gamma), cos(gamma)
    return np.array([
        -a * sg * sa,
        -a * sg * ca,
        a * cg * sa,
        a * cg * ca,
        b * sg * sb,
        -b * sg * cb,
        b * cg * sb,
        -b * cg * cb,
        -c * sa * sb,
        -c * sa * cb,
        c * ca * sb,
        c * ca * cb,
    ])


def m1x_coefficients(params: ParamsLike) -> np.ndarray:
    """The 12 coefficients of qubit 0's output x component."""
    alpha, beta, gamma, mu1, _, nu1, _, sigma1 = _angles(params)
    a = cos(mu1) * cos(nu1) * cos(sigma1) - sin(mu1) * sin(sigma1)
    b = sin(mu1) * cos(nu1) * cos(sigma1) + cos(mu1) * sin(sigma1)
    c = cos(sigma1) * sin(nu1)
    return _c_coeffs(alpha, beta, gamma, a, b, c)


def m2y_coefficients(params: ParamsLike) -> np.ndarray:
    """The 8 coefficients of qubit 1's output y component, paired with t_1..t_8."""
    alpha, beta, gamma, _, mu2, _, _, _ = _angles(params)
    c = _c_coeffs(alpha, beta, gamma, cos(mu2), sin(mu2), 0.0)
    return np.array([c[3], -c[2], -c[1], c[0], -c[7], c[6], c[5], -c[4]])


def m1x_expansion(theta1, theta2, phi1, phi2, params: ParamsLike) -> float:
    return float(m1x_coefficients(params) @ _t_terms(theta1, theta2, phi1, phi2))


def m2y_expansion(theta1, theta2, phi1, phi2, params: ParamsLike) -> float:
    return float(m2y_coefficients(params) @ _t_terms(theta1, theta2, phi1, phi2)[:8])


Vec3 = tuple[float, float, float]


@dataclass(frozen=True)
class ProofStateFixture:
    """One special input of the impossibility argument.

    ``phi1``/``phi2`` and ``expected`` take ``(alpha, beta, gamma)``.

    The argument also uses the dormant angles
    ``delta = +-arctan(sin b / (cos a cos b))``,
    ``delta_1 = -arctan(sin b / (cos a cos b))`` and
    ``delta_2 = -arctan(cos a / (sin a sin b))``, the y-rotation angles that
    would push the group 7-10 vectors onto the z axis. Nothing here consumes them.
    """

    id: int
    theta1: float
    theta2: float
    phi1: Callable[[float, float, float], float]
    phi2: Callable[[float, float, float], float]
    expected: Callable[[float, float, float], tuple[Vec3, Vec3]]

    def angles(self, alpha, beta, gamma) -> tuple[float, float, float, float]:
        return (self.theta1, self.theta2, self.phi1(alpha, beta, gamma), self.phi2(alpha, beta, gamma))

    def expected_vectors(self, alpha, beta, gamma) -> tuple[BlochVector, BlochVector]:
        n1, n2 = self.expected(alpha, beta, gamma)
        return BlochVector(*n1), BlochVector(*n2)


def _const(v: float):
    return lambda a, b, g: v


def _fix(id_, theta1, theta2, phi1, phi2, expected) -> ProofStateFixture:
    wrap = lambda p: p if callable(p) else _const(p)
    return ProofStateFixture(id_, theta1, theta2, wrap(phi1), wrap(phi2), expected)


def proof_state_catalog() -> list[ProofStateFixture]:
    h = PI / 2
    return [
        _fix(1, 0, 0, 0, 0, lambda a, b, g: ((0, 0, cos(a + b)), (0, 0, cos(a + b)))),
        _fix(2, PI, 0, 0, 0, lambda a, b, g: ((0, 0, cos(a - b)), (0, 0, -cos(a - b)))),
        _fix(3, h, h, 0, h, lambda a, b, g: ((0, cos(b + g), 0), (cos(b + g), 0, 0))),
        _fix(4, h, h, PI, h, lambda a, b, g: ((0, cos(b - g), 0), (-cos(b - g), 0, 0))),
        _fix(5, h, h, h, 0, lambda a, b, g: ((cos(a + g), 0, 0), (0, cos(a + g), 0))),
        _fix(6, h, h, h, PI, lambda a, b, g: ((-cos(a - g), 0, 0), (0, cos(a - g), 0))),
        # group 7-10: qubit 0 at a pole, qubit 1 azimuth tied to gamma
        _fix(7, PI, h, 0, lambda a, b, g: g,
             lambda a, b, g: ((cos(a), 0, sin(a) * sin(b)), (-sin(b), 0, -cos(a) * cos(b)))),
        _fix(8, 0, h, 0, lambda a, b, g: -g,
             lambda a, b, g: ((cos(a), 0, -sin(a) * sin(b)), (sin(b), 0, cos(a) * cos(b)))),
        _fix(9, 0, h, 0, lambda a, b, g: PI - g,
             lambda a, b, g: ((-cos(a), 0, -sin(a) * sin(b)), (-sin(b), 0, cos(a) * cos(b)))),
        _fix(10, PI, h, 0, lambda a, b, g: -PI + g,
             lambda a, b, g: ((-cos(a), 0, sin(a) * sin(b)), (sin(b), 0, -cos(a) * cos(b)))),
        _fix(11, PI, h, 0, lambda a, b, g: h + g,
             lambda a, b, g: ((0, cos(b), sin(a) * sin(b)), (0, sin(a), -cos(a) * cos(b)))),
        _fix(12, 0, h, 0, lambda a, b, g: h - g,
             lambda a, b, g: ((0, cos(b), -sin(a) * sin(b)), (0, -sin(a), cos(a) * cos(b)))),
        _fix(13, 0, h, 0, lambda a, b, g: -h - g,
             lambda a, b, g: ((0, -cos(b), -sin(a) * sin(b)), (0, sin(a), cos(a) * cos(b)))),
        _fix(14, PI, h, 0, lambda a, b, g: -h + g,
             lambda a, b, g: ((0, -cos(b), sin(a) * sin(b)), (0, -sin(a), -cos(a) * cos(b)))),
        # groups 15-22: roles of the qubits swapped
        _fix(15, h, PI, lambda a, b, g: g, 0,
             lambda a, b, g: ((-sin(a), 0, -cos(a) * cos(b)), (cos(b), 0, sin(a) * sin(b)))),
        _fix(16, h, 0, lambda a, b, g: -g, 0,
             lambda a, b, g: ((sin(a), 0, cos(a) * cos(b)), (cos(b), 0, -sin(a) * sin(b)))),
        _fix(17, h, 0, lambda a, b, g: PI - g, 0,
             lambda a, b, g: ((-sin(a), 0, cos(a) * cos(b)), (-cos(b), 0, -sin(a) * sin(b)))),
        _fix(18, h, PI, lambda a, b, g: PI + g, 0,
             lambda a, b, g: ((sin(a), 0, -cos(a) * cos(b)), (-cos(b), 0, sin(a) * sin(b)))),
        _fix(19, h, PI, lambda a, b, g: h + g, 0,
             lambda a, b, g: ((0, sin(b), -cos(a) * cos(b)), (0, cos(a), sin(a) * sin(b)))),
        _fix(20, h, 0, lambda a, b, g: h - g, 0,
             lambda a, b, g: ((0, -sin(b), cos(a) * cos(b)), (0, cos(a), -sin(a) * sin(b)))),
        _fix(21, h, 0, lambda a, b, g: -h - g, 0,
             lambda a, b, g: ((0, sin(b), cos(a) * cos(b)), (0, -cos(a), -sin(a) * sin(b)))),
        _fix(22, h, PI, lambda a, b, g: 3 * h + g, 0,
             lambda a, b, g: ((0, -sin(b), -cos(a) * cos(b)), (0, -cos(a), sin(a) * sin(b)))),
        _fix(23, h, h, PI / 4, PI / 4,
             lambda a, b, g: ((cos(a + g) / SQ2, cos(b + g) / SQ2, -sin(a - b) / 2),
                              (cos(b + g) / SQ2, cos(a + g) / SQ2, sin(a - b) / 2))),
        _fix(24, h, h, 5 * PI / 4, 7 * PI / 4,
             lambda a, b, g: ((cos(a - g) / SQ2, -cos(b + g) / SQ2, sin(a + b) / 2),
                              (-cos(b + g) / SQ2, -cos(a - g) / SQ2, sin(a + b) / 2))),
        _fix(25, PI / 4, PI / 4, 0, 0,
             lambda a, b, g: ((cos(g) * (SQ2 * cos(a) + sin(a)) / 2, sin(g) * (cos(b) - SQ2 * sin(b)) / 2,
                               (SQ2 * cos(a + b) - cos(b) * sin(a)) / 2),
                              (cos(g) * (SQ2 * cos(b) + sin(b)) / 2, sin(g) * (cos(a) - SQ2 * sin(a)) / 2,
                               (SQ2 * cos(a + b) - cos(a) * sin(b)) / 2))),
        _fix(26, 3 * PI / 4, 3 * PI / 4, PI, 0,
             lambda a, b, g: ((cos(g) * (SQ2 * cos(a) + sin(a)) / 2, -sin(g) * (cos(b) - SQ2 * sin(b)) / 2,
                               (-SQ2 * cos(a + b) + cos(b) * sin(a)) / 2),
                              (-cos(g) * (SQ2 * cos(b) + sin(b)) / 2, sin(g) * (cos(a) - SQ2 * sin(a)) / 2,
                               (-SQ2 * cos(a + b) + cos(a) * sin(b)) / 2))),
    ]
