import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpsync.errors import InvalidInputError
from qpsync.states import (PureAngles, angles_from_bloch, bloch_vector, density_from_bloch,
                           equatorial_state, ket, mixed_state, pure_state, reduced_bloch_vectors)

theta_st = st.floats(0, math.pi)
phi_st = st.floats(-10, 10)


def test_poles_have_zero_azimuth():
    assert PureAngles(0.0, 1.3).phi == 0.0
    assert PureAngles(math.pi, 1.3).phi == 0.0
    assert PureAngles(1.0, 7.0).phi == pytest.approx(7.0 - 2 * math.pi)


@pytest.mark.parametrize("theta", [-0.1, math.pi + 0.1])
def test_theta_out_of_range(theta):
    with pytest.raises(InvalidInputError):
        PureAngles(theta)


def test_basis_kets():
    assert np.allclose(ket(PureAngles(0)), [1, 0])
    assert np.allclose(ket(PureAngles(math.pi)), [0, 1])
    assert np.allclose(ket(PureAngles(math.pi / 2, math.pi / 2)), np.array([1, 1j]) / math.sqrt(2))


@given(theta_st, phi_st)
def test_pure_state_bloch_vector(theta, phi):
    n = bloch_vector(pure_state(PureAngles(theta, phi)))
    expected = (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
    assert np.allclose(n.as_array(), expected, atol=1e-12)
    assert abs(n.norm - 1) < 1e-12


@given(st.floats(0.05, math.pi - 0.05), st.floats(0, 2 * math.pi - 1e-6))
def test_angles_round_trip(theta, phi):
    a = angles_from_bloch(bloch_vector(pure_state(PureAngles(theta, phi))))
    assert a.theta == pytest.approx(theta, abs=1e-9)
    assert math.cos(a.phi - phi) == pytest.approx(1.0, abs=1e-9)


def test_mixed_state_shrinks_bloch_vector():
    n = bloch_vector(mixed_state(PureAngles(1.0, 2.0), 0.3))
    assert n.norm == pytest.approx(0.3)
    with pytest.raises(InvalidInputError):
        mixed_state(PureAngles(1.0), 1.5)


def test_equatorial_state():
    n = bloch_vector(equatorial_state(0.4, 1.1))
    assert np.allclose(n.as_array(), [0.4 * math.cos(1.1), 0.4 * math.sin(1.1), 0])
    assert n.projection().norm == pytest.approx(0.4)
    with pytest.raises(InvalidInputError):
        equatorial_state(-0.1, 0)


def test_bloch_vector_input_checks():
    with pytest.raises(InvalidInputError):
        bloch_vector(np.eye(4) / 4)
    with pytest.raises(InvalidInputError):
        bloch_vector(np.array([[1, 1], [0, 0]]))


def test_density_from_bloch_inverse():
    n = (0.1, -0.2, 0.3)
    assert np.allclose(bloch_vector(density_from_bloch(n)).as_array(), n)


def test_reduced_bloch_vectors_product():
    r1, r2 = pure_state(PureAngles(0.4, 0.2)), equatorial_state(0.5, 2.0)
    v = reduced_bloch_vectors(np.kron(r1, r2), 2)
    assert np.allclose(v[0].as_array(), bloch_vector(r1).as_array())
    assert np.allclose(v[1].as_array(), bloch_vector(r2).as_array())
