"""Spin algebra: operators, rotations, coherent states, extents."""

import math

import numpy as np
import pytest
import scipy.linalg

from kickedecho.spin import (
    angular_momentum_operators,
    bloch_vector,
    extent,
    grid_state_location,
    magnetic_quantum_numbers,
    rotation_pi2_about_y,
    spin_coherent_state,
)


def test_commutation_relations():
    jx, jy, jz = angular_momentum_operators(3.5)
    np.testing.assert_allclose(jx @ jy - jy @ jx, 1j * jz, atol=1e-13)
    np.testing.assert_allclose(jy @ jz - jz @ jy, 1j * jx, atol=1e-13)
    np.testing.assert_allclose(jz @ jx - jx @ jz, 1j * jy, atol=1e-13)


def test_casimir_invariant():
    j = 5.0
    jx, jy, jz = angular_momentum_operators(j)
    casimir = jx @ jx + jy @ jy + jz @ jz
    np.testing.assert_allclose(casimir, j * (j + 1) * np.eye(int(2 * j + 1)), atol=1e-12)


def test_magnetic_quantum_numbers_grid():
    m = magnetic_quantum_numbers(1.5)
    np.testing.assert_allclose(m, [-1.5, -0.5, 0.5, 1.5])


def test_spin_validation():
    with pytest.raises(ValueError):
        angular_momentum_operators(0.7)
    with pytest.raises(ValueError):
        magnetic_quantum_numbers(-1)


def test_rotation_matches_matrix_exponential():
    j = 6.0
    _, jy, _ = angular_momentum_operators(j)
    expected = scipy.linalg.expm(-1j * np.pi / 2 * jy)
    np.testing.assert_allclose(rotation_pi2_about_y(j), expected, atol=1e-12)


def test_rotation_unitary_and_cached():
    r = rotation_pi2_about_y(9.5)
    np.testing.assert_allclose(r.conj().T @ r, np.eye(20), atol=1e-12)
    assert rotation_pi2_about_y(9.5) is r


def test_coherent_state_normalized_and_oriented():
    j = 25.0
    for theta, phi in [(0.3, 1.1), (np.pi / 2, -np.pi / 2), (2.4, 0.0)]:
        state = spin_coherent_state(j, theta, phi)
        assert abs(np.linalg.norm(state) - 1.0) < 1e-12
        direction = np.array(
            [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
        )
        np.testing.assert_allclose(bloch_vector(state), j * direction, atol=1e-9)


def test_coherent_state_poles_are_basis_states():
    j = 4.0
    north = spin_coherent_state(j, 0.0, 0.4)
    south = spin_coherent_state(j, np.pi, 0.4)
    # m ascending: index 0 is m = -J, last is m = +J
    assert abs(abs(north[-1]) - 1.0) < 1e-14
    assert abs(abs(south[0]) - 1.0) < 1e-14


def test_coherent_state_overlap_law():
    # |<n1|n2>|^2 = cos(gamma/2)^(4J) with gamma the angle between the axes
    j = 15.0
    t1, t2 = 0.8, 1.3
    s1 = spin_coherent_state(j, t1, 0.0)
    s2 = spin_coherent_state(j, t2, 0.0)
    overlap = abs(np.vdot(s1, s2)) ** 2
    expected = math.cos((t2 - t1) / 2.0) ** (4 * j)
    assert abs(overlap - expected) < 1e-12


def test_coherent_state_large_spin_no_overflow():
    state = spin_coherent_state(500.0, 1.885, -1.257)
    assert np.all(np.isfinite(state.view(float)))
    assert abs(np.linalg.norm(state) - 1.0) < 1e-12


def test_coherent_state_theta_range():
    with pytest.raises(ValueError):
        spin_coherent_state(3.0, -0.1, 0.0)


def test_extent_of_coherent_state():
    # transverse variance j/2 projects onto Jz as sqrt(j/2)*sin(theta)
    j = 40.0
    m = magnetic_quantum_numbers(j)
    for theta in (0.0, 0.7, np.pi / 2):
        state = spin_coherent_state(j, theta, 0.3)
        expected = math.sqrt(j / 2.0) * math.sin(theta)
        assert abs(extent(state, m) - expected) < 1e-9


def test_extent_matrix_and_diagonal_agree():
    j = 6.0
    _, _, jz = angular_momentum_operators(j)
    state = spin_coherent_state(j, 1.0, 0.5)
    diag = extent(state, magnetic_quantum_numbers(j))
    full = extent(state, jz)
    assert abs(diag - full) < 1e-12


def test_extent_shape_validation():
    with pytest.raises(ValueError):
        extent(np.array([1.0, 0.0]), np.zeros(3))
    with pytest.raises(ValueError):
        extent(np.array([1.0, 0.0]), np.zeros((3, 3)))


def test_grid_state_locations():
    assert grid_state_location(1) == (math.pi / 10, -math.pi / 2)
    theta, phi = grid_state_location(52)
    assert abs(theta - 3 * math.pi / 5) < 1e-15 and abs(phi - (-math.pi / 2 + math.pi / 10)) < 1e-15
    theta, phi = grid_state_location(56)
    assert abs(theta - 3 * math.pi / 5) < 1e-15 and abs(phi) < 1e-15
    theta, phi = grid_state_location(100)
    assert abs(theta - math.pi) < 1e-15 and abs(phi - (-math.pi / 2 + 9 * math.pi / 10)) < 1e-15


def test_grid_state_row_major_numbering():
    # state 41 opens row 5 (theta = pi/2), state 46 is its sixth column
    assert grid_state_location(41) == (5 * math.pi / 10, -math.pi / 2)
    theta, phi = grid_state_location(46)
    assert abs(phi - 0.0) < 1e-15


@pytest.mark.parametrize("bad", [0, 101, 3.5, -2])
def test_grid_state_validation(bad):
    with pytest.raises(ValueError):
        grid_state_location(bad)
