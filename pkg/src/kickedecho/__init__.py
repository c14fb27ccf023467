"""Fidelity decay of quasi-integrable kicked quantum systems.

Simulation toolkit for the kicked top and kicked rotor near integrability:
classical phase portraits, Floquet propagators, Loschmidt-echo fidelity
series of coherent states, eigenstate extent spectra, and the fitting and
classification of the observed decay laws (gaussian, power law, exponential
and their two-stage composites) together with their scaling in spin and
perturbation strength.
"""

from .echo import (
    SaturationEstimate,
    SweepRecord,
    detect_recurrences,
    fidelity_series,
    saturation_estimate,
    sweep_rotor,
    sweep_top,
)
from .fitting import (
    DecayClassification,
    DecayFit,
    ScalingFit,
    classify_decay,
    fit_exponential,
    fit_gaussian,
    fit_power_law,
    gamma_g_normalized,
    scaling_exponent,
)
from .numerics import (
    EigenSystem,
    RegressionResult,
    dft,
    eig_hermitian,
    eig_unitary,
    linear_least_squares,
)
from .spectral import (
    ExtentSpectrum,
    FloquetEigensystem,
    SpectrumSummary,
    extent_spectrum,
    floquet_eigensystem,
    spectrum_shape_summary,
    top_eigensystem,
)
from .spin import (
    angular_momentum_operators,
    bloch_vector,
    extent,
    grid_state_location,
    magnetic_quantum_numbers,
    rotation_pi2_about_y,
    spin_coherent_state,
)
from .systems import (
    RotorFloquet,
    TopFloquet,
    default_portrait_seeds,
    generate_portrait,
    kicked_rotor_step,
    kicked_top_step,
    rotor_floquet,
    sphere_angles,
    sphere_point,
    top_floquet,
    torus_coherent_state,
    wrap_unit_cell,
)

__version__ = "0.1.0"

__all__ = [
    "DecayClassification",
    "DecayFit",
    "EigenSystem",
    "ExtentSpectrum",
    "FloquetEigensystem",
    "RegressionResult",
    "RotorFloquet",
    "SaturationEstimate",
    "ScalingFit",
    "SpectrumSummary",
    "SweepRecord",
    "TopFloquet",
    "angular_momentum_operators",
    "bloch_vector",
    "classify_decay",
    "default_portrait_seeds",
    "detect_recurrences",
    "dft",
    "eig_hermitian",
    "eig_unitary",
    "extent",
    "extent_spectrum",
    "fidelity_series",
    "fit_exponential",
    "fit_gaussian",
    "fit_power_law",
    "floquet_eigensystem",
    "gamma_g_normalized",
    "generate_portrait",
    "grid_state_location",
    "kicked_rotor_step",
    "kicked_top_step",
    "linear_least_squares",
    "magnetic_quantum_numbers",
    "rotation_pi2_about_y",
    "rotor_floquet",
    "saturation_estimate",
    "scaling_exponent",
    "sphere_angles",
    "sphere_point",
    "spectrum_shape_summary",
    "spin_coherent_state",
    "sweep_rotor",
    "sweep_top",
    "top_eigensystem",
    "top_floquet",
    "torus_coherent_state",
    "wrap_unit_cell",
    "__version__",
]
