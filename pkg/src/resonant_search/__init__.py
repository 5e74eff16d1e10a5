"""Continuous-time quantum search driven by a resonant potential.

Submodules: :mod:`spectrum` (H0 spectra and search instances),
:mod:`dynamics` (RK4 amplitude integration), :mod:`analytic` (two-level
rotating-wave formulas), :mod:`floquet` (discrete-time operator) and
:mod:`harness` (experiment drivers used by the CLI).
"""

from .analytic import RwaModel, detuned_peak_probability, optimal_time, resonance_width, rwa_probabilities
from .dynamics import (
    AmplitudeState,
    IntegratorConfig,
    NormDriftError,
    Trajectory,
    derivative,
    evolve,
    find_first_peak,
    probabilities,
)
from .floquet import (
    build_floquet_operator,
    characteristic_roots,
    discrete_search,
    floquet_states,
    unitarity_defect,
)
from .spectrum import SearchProblem, SpectrumModel, bohr_frequency, eigenvalue, resonance_quality

__all__ = [
    "AmplitudeState",
    "IntegratorConfig",
    "NormDriftError",
    "RwaModel",
    "SearchProblem",
    "SpectrumModel",
    "Trajectory",
    "bohr_frequency",
    "build_floquet_operator",
    "characteristic_roots",
    "derivative",
    "detuned_peak_probability",
    "discrete_search",
    "eigenvalue",
    "evolve",
    "find_first_peak",
    "floquet_states",
    "optimal_time",
    "probabilities",
    "resonance_quality",
    "resonance_width",
    "rwa_probabilities",
    "unitarity_defect",
]
