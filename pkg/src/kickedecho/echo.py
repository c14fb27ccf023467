"""Fidelity decay engine: co-evolution series, recurrences, state sweeps.

The central quantity is the overlap decay
F(t) = |<psi| (U'^dag)^t U^t |psi>|^2 between evolution under a propagator U
and its perturbed twin U'.  It is computed by co-evolving the single pair of
states (U^t psi, U'^t psi), so a horizon-T series costs 2T applications and
no operator powers are ever materialized.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .spin import grid_state_location, spin_coherent_state
from .systems import rotor_floquet, top_floquet, torus_coherent_state

_NORM_TOL = 1e-10


@dataclass(frozen=True)
class SaturationEstimate:
    """Late-time plateau estimate; `reliable` is False when the tail still moves."""

    value: float
    reliable: bool


def fidelity_series(u, u_perturbed, state: np.ndarray, horizon: int) -> np.ndarray:
    """Overlap decay F(t) for t = 0..horizon between two co-evolved states.

    Args:
        u: unperturbed propagator, any object with ``apply(state)``.
        u_perturbed: perturbed propagator of the same dimension.
        state: normalized initial vector.
        horizon: number of periods T; the result has length T + 1.

    Returns:
        Real array F with F[0] = 1 and F[t] = |<u^t psi|u'^t psi>|^2.
    """
    if horizon < 1:
        raise ValueError("horizon must be a positive integer")
    state = np.asarray(state, dtype=complex)
    if u.dim != state.size or u_perturbed.dim != state.size:
        raise ValueError(
            f"dimension mismatch: propagators {u.dim}/{u_perturbed.dim}, state {state.size}"
        )
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > _NORM_TOL:
        raise ValueError(f"initial state is not normalized: |psi| = {norm!r}")
    series = np.empty(horizon + 1)
    series[0] = abs(np.vdot(state, state)) ** 2
    forward = state
    perturbed = state
    for t in range(1, horizon + 1):
        forward = u.apply(forward)
        perturbed = u_perturbed.apply(perturbed)
        series[t] = abs(np.vdot(forward, perturbed)) ** 2
    return series


def saturation_estimate(series: np.ndarray) -> SaturationEstimate:
    """Mean of the final quarter of the series, flagged by its spread.

    The estimate is marked unreliable when the final quarter's standard
    deviation exceeds half its mean, i.e. when the series has not settled.
    """
    series = np.asarray(series, dtype=float)
    if series.size < 4:
        raise ValueError("series too short for a saturation estimate")
    tail = series[-(series.size // 4):]
    value = float(tail.mean())
    spread = float(tail.std())
    reliable = value > 0.0 and spread <= 0.5 * value
    return SaturationEstimate(value, reliable)


def detect_recurrences(series: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """Times of fidelity revivals above `threshold`.

    A revival is armed once the series has dropped below threshold/2; the
    peak of the following excursion above `threshold` is recorded, and the
    detector re-arms on the next drop below threshold/2.  The hysteresis
    keeps ripple on a single revival from being counted twice.
    """
    series = np.asarray(series, dtype=float)
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    times: list[int] = []
    armed = False
    peak_time = -1
    peak_value = -np.inf
    in_peak = False
    for t, value in enumerate(series):
        if not armed:
            if value < threshold / 2.0:
                armed = True
            continue
        if value > threshold:
            in_peak = True
            if value > peak_value:
                peak_value = value
                peak_time = t
        elif in_peak and value < threshold / 2.0:
            times.append(peak_time)
            armed = True
            in_peak = False
            peak_value = -np.inf
    if in_peak:
        times.append(peak_time)
    return np.asarray(times, dtype=int)


@dataclass(frozen=True)
class SweepRecord:
    """Classified decay of one initial state.

    `state` is the grid index (top sweeps) or the (q0, p0) pair (rotor
    sweeps); `location` is (theta, phi) on the sphere or (q0, p0) again.
    """

    state: object
    location: tuple[float, float]
    classification: object
    series: np.ndarray


def _run_states(u, u_perturbed, labeled_states, horizon: int, jobs: int | None):
    from . import fitting  # imported here to avoid a module cycle

    def run(entry):
        label, location, state = entry
        series = fidelity_series(u, u_perturbed, state, horizon)
        return SweepRecord(label, location, fitting.classify_decay(series), series)

    entries = list(labeled_states)
    if jobs is not None and jobs > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, entries))
    return [run(entry) for entry in entries]


def sweep_top(
    j: float,
    kick_strength: float,
    delta: float,
    grid_states,
    horizon: int,
    jobs: int | None = None,
) -> list[SweepRecord]:
    """Fidelity decay classification for numbered grid states of the top.

    Builds the propagator pair (k, k + delta) once and runs every grid state
    through :func:`fidelity_series` and the decay classifier, optionally in
    parallel (`jobs` worker threads; the heavy matrix products release the
    interpreter lock).
    """
    u = top_floquet(j, kick_strength)
    u_pert = top_floquet(j, kick_strength + delta)
    labeled = []
    for index in grid_states:
        theta, phi = grid_state_location(index)
        labeled.append((int(index), (theta, phi), spin_coherent_state(j, theta, phi)))
    return _run_states(u, u_pert, labeled, horizon, jobs)


def sweep_rotor(
    n: int,
    kick_strength: float,
    delta: float,
    points,
    horizon: int,
    jobs: int | None = None,
) -> list[SweepRecord]:
    """Fidelity decay classification for torus wavepackets of the rotor.

    `points` is an iterable of (q0, p0) centers in the fundamental cell.
    """
    u = rotor_floquet(n, kick_strength)
    u_pert = rotor_floquet(n, kick_strength + delta)
    labeled = []
    for q0, p0 in points:
        center = (float(q0), float(p0))
        labeled.append((center, center, torus_coherent_state(n, q0, p0)))
    return _run_states(u, u_pert, labeled, horizon, jobs)
