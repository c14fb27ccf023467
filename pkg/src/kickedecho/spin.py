"""Angular momentum operators, SU(2) coherent states and spread measures.

All matrices act on the (2J+1)-dimensional Jz eigenbasis ordered by magnetic
quantum number m = -J..J ascending.  That ordering is a project-wide
convention; every state vector and operator in the package follows it.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .numerics import eig_hermitian

# Spin values are validated as integer or half-integer to this tolerance.
_SPIN_TOL = 1e-9


def _validate_spin(j: float) -> float:
    j = float(j)
    if j <= 0 or abs(2 * j - round(2 * j)) > _SPIN_TOL:
        raise ValueError(f"spin must be a positive integer or half-integer, got {j}")
    return round(2 * j) / 2.0


def magnetic_quantum_numbers(j: float) -> np.ndarray:
    """The m grid -J..J ascending, length 2J+1."""
    j = _validate_spin(j)
    return np.arange(-j, j + 0.5)


def angular_momentum_operators(j: float):
    """Dense (Jx, Jy, Jz) matrices for spin j.

    Jz is diagonal with entries m = -J..J; Jx and Jy follow from the ladder
    operators, <m+1|J+|m> = sqrt(J(J+1) - m(m+1)).
    """
    j = _validate_spin(j)
    m = magnetic_quantum_numbers(j)
    dim = m.size
    ladder = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jplus = np.zeros((dim, dim))
    jplus[np.arange(1, dim), np.arange(dim - 1)] = ladder
    jx = (jplus + jplus.T) / 2.0
    jy = (jplus - jplus.T) / 2j
    jz = np.diag(m)
    return jx, jy, jz


_rotation_cache: dict[float, np.ndarray] = {}


def rotation_pi2_about_y(j: float) -> np.ndarray:
    """The unitary exp(-i*pi*Jy/2) for spin j.

    Computed by spectral exponentiation: Jy is diagonalized once and its
    eigenvalues, which are exactly the m grid, are snapped to it so the
    phases exp(-i*pi*m/2) carry no eigenvalue roundoff.  Results are cached
    per spin (the matrix is the expensive part of the kicked-top propagator)
    and returned read-only.
    """
    j = _validate_spin(j)
    cached = _rotation_cache.get(j)
    if cached is not None:
        return cached
    _, jy, _ = angular_momentum_operators(j)
    system = eig_hermitian(jy)
    m_exact = np.round(2 * system.values) / 2.0
    phases = np.exp(-1j * np.pi * m_exact / 2.0)
    rotation = (system.vectors * phases[None, :]) @ system.vectors.conj().T
    rotation.setflags(write=False)
    _rotation_cache[j] = rotation
    return rotation


def spin_coherent_state(j: float, theta: float, phi: float) -> np.ndarray:
    """SU(2) coherent state pointing along (theta, phi) on the Bloch sphere.

    Amplitudes in the Jz basis are
    c_m = sqrt(C(2J, J+m)) cos(theta/2)^(J+m) sin(theta/2)^(J-m) e^{-i m phi},
    evaluated in log space so large J does not overflow, then normalized.
    The state's spin expectation is J*(sin t cos p, sin t sin p, cos t) and
    its variance transverse to that axis is the minimal J/2.

    Args:
        j: spin, positive integer or half-integer.
        theta: polar angle in [0, pi].
        phi: azimuthal angle, any real.
    """
    j = _validate_spin(j)
    theta = float(theta)
    phi = float(phi)
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    m = magnetic_quantum_numbers(j)
    dim = m.size
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    state = np.zeros(dim, dtype=complex)
    if s == 0.0:
        state[-1] = np.exp(-1j * j * phi)
        return state
    if c == 0.0:
        state[0] = np.exp(1j * j * phi)
        return state
    two_j = int(round(2 * j))
    k = (m + j).astype(int)
    log_binom = gammaln(two_j + 1) - gammaln(k + 1) - gammaln(two_j - k + 1)
    log_amp = 0.5 * log_binom + k * math.log(c) + (two_j - k) * math.log(s)
    amp = np.exp(log_amp - log_amp.max())
    amp /= np.linalg.norm(amp)
    return amp * np.exp(-1j * m * phi)


def bloch_vector(state: np.ndarray) -> np.ndarray:
    """Expectation (⟨Jx⟩, ⟨Jy⟩, ⟨Jz⟩) of a spin state in the m-ascending basis."""
    state = np.asarray(state)
    dim = state.size
    j = (dim - 1) / 2.0
    m = magnetic_quantum_numbers(j)
    ladder = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    # <J+> = sum_m ladder_m * conj(c_{m+1}) c_m
    jplus = np.sum(ladder * np.conj(state[1:]) * state[:-1])
    jz = float(np.sum(m * np.abs(state) ** 2))
    return np.array([jplus.real, jplus.imag, jz])


def extent(state: np.ndarray, operator: np.ndarray) -> float:
    """Spread sqrt(<psi|A^2|psi> - |<psi|A|psi>|^2) of a Hermitian observable.

    `operator` may be a full matrix or a 1-d array of diagonal entries (the
    common case A = Jz).  The variance is clipped at zero before the square
    root to absorb roundoff on sharply localized states.
    """
    state = np.asarray(state, dtype=complex)
    operator = np.asarray(operator)
    if operator.ndim == 1:
        if operator.size != state.size:
            raise ValueError("diagonal length does not match state dimension")
        density = np.abs(state) ** 2
        first = float(np.dot(operator, density))
        second = float(np.dot(operator**2, density))
    else:
        if operator.shape != (state.size, state.size):
            raise ValueError("operator shape does not match state dimension")
        applied = operator @ state
        first = float(np.vdot(state, applied).real)
        second = float(np.vdot(applied, applied).real)
    return math.sqrt(max(0.0, second - abs(first) ** 2))


def grid_state_location(index: int) -> tuple[float, float]:
    """(theta, phi) of a numbered state on the 10 x 10 sphere grid.

    States are numbered 1..100 row-major: row r = ceil(index/10) sets
    theta = r*pi/10, column c = index - 10*(r-1) sets phi = -pi/2 + (c-1)*pi/10.
    """
    if int(index) != index or not 1 <= int(index) <= 100:
        raise ValueError(f"grid state index must be an integer in 1..100, got {index}")
    index = int(index)
    row = (index + 9) // 10
    col = index - 10 * (row - 1)
    return row * math.pi / 10.0, -math.pi / 2.0 + (col - 1) * math.pi / 10.0
