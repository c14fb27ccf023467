"""Floquet eigensystems, eigenstate extents and overlap spectra.

The structure of a fidelity decay is visible in how the initial state spreads
over Floquet eigenstates: the overlap weights |<psi|phi_j>|^2 against the
eigenstates' Jz spread separate sharply localized (gaussian-decay) states
from orbit-spanning (power-law) ones.  The eigendecomposition is the one
expensive step, so it can be cached on disk keyed by the system parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numerics import eig_unitary
from .spin import extent, magnetic_quantum_numbers
from .systems import top_floquet

CACHE_FORMAT_VERSION = 1

# Eigenphase gaps below this are treated as degenerate when reporting spectra;
# the eigenbasis inside such a pair is solver gauge, not physics.
DEGENERACY_GAP = 1e-10


@dataclass(frozen=True)
class FloquetEigensystem:
    """Eigenpairs of a Floquet operator plus per-eigenstate extents.

    Attributes:
        values: unimodular eigenvalues sorted by phase in (-pi, pi].
        vectors: matching orthonormal eigenvectors as columns.
        extents: spread of the extent observable in each eigenstate.
        residual_norm: max eigenpair residual certified at build time.
        from_cache: True when loaded from disk instead of recomputed.
    """

    values: np.ndarray
    vectors: np.ndarray
    extents: np.ndarray
    residual_norm: float
    from_cache: bool = False

    @property
    def dim(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ExtentSpectrum:
    """Overlap spectrum of one state: amplitude against eigenstate extent.

    Rows are sorted by extent ascending; amplitudes of eigenstates whose
    eigenphases are degenerate to within DEGENERACY_GAP are merged into one
    row (summed amplitude, amplitude-weighted extent).
    """

    extents: np.ndarray
    amplitudes: np.ndarray


@dataclass(frozen=True)
class SpectrumSummary:
    """Aggregates of an extent spectrum used to sort decay geography."""

    component_count: int
    component_weight: float
    dominant_amplitude: float
    dominant_extent: float
    mean_extent: float


def floquet_eigensystem(operator, extent_diagonal) -> FloquetEigensystem:
    """Diagonalize a Floquet operator and measure each eigenstate's extent.

    Args:
        operator: dense unitary matrix, or an object with ``materialize()``.
        extent_diagonal: diagonal entries of the (diagonal) extent observable,
            e.g. the m grid for Jz.
    """
    matrix = operator.materialize() if hasattr(operator, "materialize") else np.asarray(operator)
    system = eig_unitary(matrix)
    diag = np.asarray(extent_diagonal, dtype=float)
    if diag.size != system.values.size:
        raise ValueError("extent diagonal does not match operator dimension")
    weights = np.abs(system.vectors) ** 2
    first = diag @ weights
    second = (diag**2) @ weights
    extents = np.sqrt(np.maximum(0.0, second - first**2))
    return FloquetEigensystem(system.values, system.vectors, extents, system.residual_norm)


def _cache_path(cache_dir, j: float, kick_strength: float) -> Path:
    name = f"top_eigensystem_J{j:g}_k{kick_strength:g}_v{CACHE_FORMAT_VERSION}.npz"
    return Path(cache_dir) / name


def top_eigensystem(
    j: float, kick_strength: float, cache_dir: str | Path | None = None
) -> FloquetEigensystem:
    """Eigensystem of the kicked-top propagator, optionally cached on disk.

    With `cache_dir` set, a hit returns the stored eigenpairs (marked
    ``from_cache``) and a miss computes, then writes the cache file.  Files
    carry a format version; stale or mismatched files are recomputed.
    """
    path = None
    if cache_dir is not None:
        path = _cache_path(cache_dir, j, kick_strength)
        loaded = _load_cache(path, int(round(2 * j)) + 1)
        if loaded is not None:
            return loaded
    system = floquet_eigensystem(top_floquet(j, kick_strength), magnetic_quantum_numbers(j))
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez_compressed(
            path,
            format_version=CACHE_FORMAT_VERSION,
            j=float(j),
            kick_strength=float(kick_strength),
            values=system.values,
            vectors=system.vectors,
            extents=system.extents,
            residual_norm=system.residual_norm,
        )
    return system


def _load_cache(path: Path, dim: int) -> FloquetEigensystem | None:
    if not path.is_file():
        return None
    try:
        with np.load(path) as data:
            if int(data["format_version"]) != CACHE_FORMAT_VERSION:
                return None
            values = data["values"]
            if values.size != dim:
                return None
            return FloquetEigensystem(
                values,
                data["vectors"],
                data["extents"],
                float(data["residual_norm"]),
                from_cache=True,
            )
    except (OSError, KeyError, ValueError):
        return None


def _degenerate_groups(phases: np.ndarray) -> list[np.ndarray]:
    """Group indices of sorted-by-phase eigenvalues by sub-DEGENERACY_GAP gaps.

    The phase circle wraps, so a group touching +pi may continue at -pi; the
    first and last chains are merged when the wrap-around gap is degenerate.
    """
    n = phases.size
    order = np.argsort(phases, kind="stable")
    groups: list[list[int]] = [[int(order[0])]]
    for idx in order[1:]:
        if phases[idx] - phases[groups[-1][-1]] < DEGENERACY_GAP:
            groups[-1].append(int(idx))
        else:
            groups.append([int(idx)])
    if len(groups) > 1:
        wrap = phases[order[0]] + 2.0 * math.pi - phases[order[-1]]
        if wrap < DEGENERACY_GAP:
            groups[0] = groups.pop() + groups[0]
    return [np.asarray(g, dtype=int) for g in groups]


def extent_spectrum(state: np.ndarray, system: FloquetEigensystem) -> ExtentSpectrum:
    """Overlap amplitudes |<psi|phi_j>|^2 against eigenstate extents.

    Degenerate eigenphase groups are reported as single rows; within such a
    group only the summed amplitude is gauge invariant.
    """
    state = np.asarray(state, dtype=complex)
    if state.size != system.dim:
        raise ValueError("state dimension does not match eigensystem")
    amplitudes = np.abs(system.vectors.conj().T @ state) ** 2
    phases = np.angle(system.values)
    rows = []
    for group in _degenerate_groups(phases):
        weight = float(amplitudes[group].sum())
        if weight > 0.0:
            ext = float(np.average(system.extents[group], weights=amplitudes[group]))
        else:
            ext = float(system.extents[group].mean())
        rows.append((ext, weight))
    rows.sort()
    extents = np.array([r[0] for r in rows])
    weights = np.array([r[1] for r in rows])
    return ExtentSpectrum(extents, weights)


def spectrum_shape_summary(spectrum: ExtentSpectrum, threshold: float = 0.01) -> SpectrumSummary:
    """Reduce a spectrum to the aggregates used for classification maps.

    Components at or above `threshold` are counted and weighed; the dominant
    component and the amplitude-weighted mean extent characterize where the
    state lives.
    """
    if spectrum.amplitudes.size == 0:
        raise ValueError("empty spectrum")
    above = spectrum.amplitudes >= threshold
    top = int(np.argmax(spectrum.amplitudes))
    total = float(spectrum.amplitudes.sum())
    mean_extent = float(np.average(spectrum.extents, weights=spectrum.amplitudes)) if total > 0 else 0.0
    return SpectrumSummary(
        component_count=int(np.count_nonzero(above)),
        component_weight=float(spectrum.amplitudes[above].sum()),
        dominant_amplitude=float(spectrum.amplitudes[top]),
        dominant_extent=float(spectrum.extents[top]),
        mean_extent=mean_extent,
    )
