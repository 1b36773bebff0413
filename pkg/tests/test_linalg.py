import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from exchange_pulses.errors import InvalidArgument
from exchange_pulses.linalg import (HADAMARD, SIGMA_X, SIGMA_Y, SIGMA_Z, AxisAngle,
                                    axis_angle_from_unitary, bloch_vector, expm_hermitian,
                                    fidelity_up_to_phase, rotation, rotation_operator,
                                    unitarity_error)

from conftest import random_unit_vector


class TestRotationOperator:
    def test_zero_angle_is_identity(self):
        assert np.array_equal(rotation((0, 0, 1), 0.0), np.eye(2))

    def test_z_pi(self):
        np.testing.assert_allclose(rotation((0, 0, 1), math.pi), -1j * np.diag([1, -1]), atol=1e-15)

    def test_y_half_pi(self):
        expected = np.array([[1, -1], [1, 1]]) / math.sqrt(2)
        np.testing.assert_allclose(rotation((0, 1, 0), math.pi / 2), expected, atol=1e-15)

    def test_matches_pauli_sum(self, rng):
        for _ in range(50):
            n = random_unit_vector(rng)
            psi = rng.uniform(-10, 10)
            ns = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
            expected = math.cos(psi / 2) * np.eye(2) - 1j * math.sin(psi / 2) * ns
            u = rotation(n, psi)
            np.testing.assert_allclose(u, expected, atol=1e-14)
            assert abs(np.linalg.det(u) - 1) <= 1e-12
            assert unitarity_error(u) <= 1e-12

    @pytest.mark.parametrize("axis", [(1, 1, 0), (0, 0, 0), (0, 0, 1 + 1e-9)])
    def test_non_unit_axis_rejected(self, axis):
        with pytest.raises(InvalidArgument):
            AxisAngle(axis, 1.0)

    def test_non_finite_angle_rejected(self):
        with pytest.raises(InvalidArgument):
            AxisAngle((0, 0, 1), math.inf)

    def test_canonical_range(self):
        assert AxisAngle((0, 0, 1), -1.0).canonical().angle == pytest.approx(4 * math.pi - 1.0)

    def test_composition_about_same_axis(self, rng):
        for _ in range(200):
            n = random_unit_vector(rng)
            a, b = rng.uniform(0, 4 * math.pi, size=2)
            prod = rotation(n, a) @ rotation(n, b)
            assert fidelity_up_to_phase(prod, rotation(n, a + b)) >= 1 - 1e-11


class TestExpmHermitian:
    def test_zero_hamiltonian(self):
        for dim in (2, 4):
            assert np.allclose(expm_hermitian(np.zeros((dim, dim)), 3.7), np.eye(dim), atol=0)

    def test_diagonal(self):
        u = expm_hermitian(SIGMA_Z, math.pi / 2)
        np.testing.assert_allclose(u, np.diag([np.exp(-0.5j * math.pi), np.exp(0.5j * math.pi)]), atol=1e-15)

    def test_hadamard_generator(self):
        # eigenvalues of [[1,1],[1,-1]] are +-sqrt2; exp(-i sqrt2 t n.sigma) at t = pi/(2 sqrt2)
        u = expm_hermitian(np.array([[1.0, 1.0], [1.0, -1.0]]), math.pi / (2 * math.sqrt(2)))
        np.testing.assert_allclose(u, -1j * (SIGMA_X + SIGMA_Z) / math.sqrt(2), atol=1e-15)
        assert fidelity_up_to_phase(u, HADAMARD) == pytest.approx(1, abs=1e-15)

    @pytest.mark.parametrize("dim", [2, 4, 8])
    def test_against_pade(self, rng, dim):
        for _ in range(20):
            a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            h = a + a.conj().T
            t = rng.uniform(-3, 3)
            u = expm_hermitian(h, t)
            np.testing.assert_allclose(u, scipy.linalg.expm(-1j * h * t), atol=1e-11)
            assert unitarity_error(u) <= 1e-12

    def test_same_hamiltonian_composes(self, rng):
        for dim in (2, 4):
            for _ in range(50):
                a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
                h = a + a.conj().T
                t1, t2 = rng.uniform(0, 5, size=2)
                np.testing.assert_allclose(expm_hermitian(h, t1) @ expm_hermitian(h, t2),
                                           expm_hermitian(h, t1 + t2), atol=1e-11)

    def test_non_hermitian_rejected(self):
        with pytest.raises(InvalidArgument):
            expm_hermitian(np.array([[0, 1], [0, 0]]), 1.0)


class TestFidelity:
    def test_self(self, rng):
        u = rotation(random_unit_vector(rng), 1.3)
        assert fidelity_up_to_phase(u, u) == pytest.approx(1, abs=1e-15)

    @pytest.mark.parametrize("phi", [0.3, math.pi, -2.0])
    def test_global_phase_invariant(self, phi):
        u = rotation((0.6, 0, 0.8), 1.1)
        assert fidelity_up_to_phase(u, np.exp(1j * phi) * u) == pytest.approx(1, abs=1e-15)

    def test_orthogonal(self):
        assert fidelity_up_to_phase(np.eye(2), SIGMA_X) == 0

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgument):
            fidelity_up_to_phase(np.eye(2), np.eye(4))


class TestAxisAngleFromUnitary:
    def test_identity(self):
        aa = axis_angle_from_unitary(np.eye(2))
        assert aa.axis == (0.0, 0.0, 1.0) and aa.angle == 0.0

    def test_y_pi(self):
        aa = axis_angle_from_unitary(-1j * SIGMA_Y)
        np.testing.assert_allclose(aa.axis, (0, 1, 0), atol=1e-15)
        assert aa.angle == pytest.approx(math.pi, abs=1e-15)

    def test_example_round_trip(self):
        aa = axis_angle_from_unitary(rotation((0.6, 0, 0.8), 1.1))
        np.testing.assert_allclose(aa.axis, (0.6, 0, 0.8), atol=1e-12)
        assert aa.angle == pytest.approx(1.1, abs=1e-12)

    def test_global_phase_removed(self):
        aa = axis_angle_from_unitary(np.exp(0.7j) * rotation((0, 1, 0), 0.4))
        np.testing.assert_allclose(aa.axis, (0, 1, 0), atol=1e-12)
        assert aa.angle == pytest.approx(0.4, abs=1e-12)

    def test_round_trip_1000(self, rng):
        worst = 0.0
        for _ in range(1000):
            n = np.array(random_unit_vector(rng))
            psi = rng.uniform(0, 2 * math.pi)
            aa = axis_angle_from_unitary(rotation(tuple(n), psi))
            same = max(np.max(np.abs(np.array(aa.axis) - n)), abs(aa.angle - psi))
            flipped = max(np.max(np.abs(np.array(aa.axis) + n)), abs(aa.angle - (2 * math.pi - psi)))
            worst = max(worst, min(same, flipped))
        assert worst <= 1e-9


@settings(max_examples=200, deadline=None)
@given(
    x=st.floats(-1, 1), y=st.floats(-1, 1), z=st.floats(-1, 1),
    psi=st.floats(1e-3, 2 * math.pi - 1e-3),
)
def test_round_trip_property(x, y, z, psi):
    v = np.array([x, y, z])
    if np.linalg.norm(v) < 1e-3:
        v = np.array([0.0, 0.0, 1.0])
    n = tuple(v / np.linalg.norm(v))
    u = rotation(n, psi)
    back = rotation_operator(axis_angle_from_unitary(u))
    assert min(np.max(np.abs(back - u)), np.max(np.abs(back + u))) <= 1e-9


def test_bloch_vector_of_basis_states():
    np.testing.assert_allclose(bloch_vector([1, 0]), (0, 0, 1))
    np.testing.assert_allclose(bloch_vector(np.array([1, 1]) / math.sqrt(2)), (1, 0, 0), atol=1e-15)
    np.testing.assert_allclose(bloch_vector(np.array([1, 1j]) / math.sqrt(2)), (0, 1, 0), atol=1e-15)
