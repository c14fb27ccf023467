"""Floquet eigensystems, extent spectra, and the disk cache."""

import numpy as np
import pytest

from kickedecho.spectral import (
    DEGENERACY_GAP,
    FloquetEigensystem,
    extent_spectrum,
    floquet_eigensystem,
    spectrum_shape_summary,
    top_eigensystem,
)
from kickedecho.spin import grid_state_location, magnetic_quantum_numbers, spin_coherent_state
from kickedecho.systems import top_floquet


def test_floquet_eigensystem_residual_and_extents():
    j = 10.0
    system = floquet_eigensystem(top_floquet(j, 1.1), magnetic_quantum_numbers(j))
    assert system.dim == 21
    assert system.residual_norm < 1e-12
    assert np.all(system.extents >= 0.0)
    assert np.all(system.extents <= j + 1e-9)
    np.testing.assert_allclose(np.abs(system.values), 1.0, atol=1e-12)


def test_extent_diagonal_length_validation():
    with pytest.raises(ValueError):
        floquet_eigensystem(top_floquet(3.0, 1.1), np.zeros(5))


def test_spectrum_completeness():
    j = 15.0
    system = floquet_eigensystem(top_floquet(j, 1.1), magnetic_quantum_numbers(j))
    rng = np.random.default_rng(20)
    state = rng.normal(size=system.dim) + 1j * rng.normal(size=system.dim)
    state /= np.linalg.norm(state)
    spectrum = extent_spectrum(state, system)
    assert spectrum.amplitudes.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(spectrum.extents) >= 0)


def test_spectrum_dimension_validation():
    system = floquet_eigensystem(top_floquet(3.0, 1.1), magnetic_quantum_numbers(3.0))
    with pytest.raises(ValueError):
        extent_spectrum(np.zeros(4), system)


def test_degenerate_amplitudes_merge_gauge_invariantly():
    # two eigenvectors sharing an eigenphase: any unitary mixing inside the
    # pair must leave the reported (merged) amplitude unchanged
    phases = np.array([-1.0, 0.5, 0.5 + 0.25 * DEGENERACY_GAP])
    values = np.exp(1j * phases)
    vectors = np.eye(3, dtype=complex)
    extents = np.array([1.0, 2.0, 4.0])
    plain = FloquetEigensystem(values, vectors, extents, 0.0)
    mix = np.eye(3, dtype=complex)
    angle = 0.6
    mix[1:, 1:] = [[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]]
    mixed = FloquetEigensystem(values, vectors @ mix, extents, 0.0)
    state = np.array([0.6, 0.48, 0.64], dtype=complex)
    a = extent_spectrum(state, plain)
    b = extent_spectrum(state, mixed)
    assert a.amplitudes.size == 2
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)
    assert a.amplitudes[-1] == pytest.approx(0.48**2 + 0.64**2)


def test_stable_island_state_is_concentrated():
    # the state at the stable fixed point projects mostly onto few eigenstates
    j = 40.0
    system = floquet_eigensystem(top_floquet(j, 1.1), magnetic_quantum_numbers(j))
    state = spin_coherent_state(j, *grid_state_location(41))
    summary = spectrum_shape_summary(extent_spectrum(state, system))
    assert summary.dominant_amplitude > 0.5
    assert summary.dominant_extent < j / 4


def test_spectrum_shape_summary_counts():
    spectrum_extents = np.array([1.0, 2.0, 3.0, 4.0])
    amplitudes = np.array([0.005, 0.295, 0.2, 0.5])
    from kickedecho.spectral import ExtentSpectrum

    summary = spectrum_shape_summary(ExtentSpectrum(spectrum_extents, amplitudes), threshold=0.01)
    assert summary.component_count == 3
    assert summary.component_weight == pytest.approx(0.995)
    assert summary.dominant_amplitude == pytest.approx(0.5)
    assert summary.dominant_extent == pytest.approx(4.0)
    with pytest.raises(ValueError):
        spectrum_shape_summary(ExtentSpectrum(np.array([]), np.array([])))


def test_eigensystem_cache_roundtrip(tmp_path):
    cold = top_eigensystem(8.0, 1.1, cache_dir=tmp_path)
    assert not cold.from_cache
    warm = top_eigensystem(8.0, 1.1, cache_dir=tmp_path)
    assert warm.from_cache
    np.testing.assert_array_equal(cold.values, warm.values)
    np.testing.assert_array_equal(cold.vectors, warm.vectors)
    np.testing.assert_array_equal(cold.extents, warm.extents)
    # different parameters miss the cache
    other = top_eigensystem(8.0, 1.2, cache_dir=tmp_path)
    assert not other.from_cache


def test_eigensystem_cache_rejects_corrupt_file(tmp_path):
    top_eigensystem(6.0, 1.1, cache_dir=tmp_path)
    (cache_file,) = tmp_path.glob("*.npz")
    cache_file.write_bytes(b"not a cache")
    again = top_eigensystem(6.0, 1.1, cache_dir=tmp_path)
    assert not again.from_cache
    assert again.residual_norm < 1e-12


def test_cached_and_fresh_spectra_agree(tmp_path):
    j = 12.0
    fresh = top_eigensystem(j, 1.1)
    top_eigensystem(j, 1.1, cache_dir=tmp_path)
    cached = top_eigensystem(j, 1.1, cache_dir=tmp_path)
    state = spin_coherent_state(j, *grid_state_location(52))
    a = extent_spectrum(state, fresh)
    b = extent_spectrum(state, cached)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-13)
    np.testing.assert_allclose(a.extents, b.extents, atol=1e-13)
