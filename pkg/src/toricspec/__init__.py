"""Equivariant spectra of circle-invariant metrics on the sphere and the
reconstruction of a single-well metric profile from its semiclassical
spectral invariants.

Modules
-------
profiles      metric profiles ``v(x)`` and single-well certification
symbolic      small exact expression engine
semiclassics  symbolic coefficients of the semiclassical expansion
laplace       per-weight Laplace eigenvalues
measure       spectral measure and its two-term prediction
invariants    phase-space integrals ``W``, ``Q`` and smooth invariants
abel          fractional integration and the Volterra solver
inverse       reconstruction pipeline
estimators    scikit-learn style wrappers
cli           command-line front end
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .profiles import (
    MetricProfile,
    certify_single_well,
    check_pole_regularity,
    make_perturbed_well,
    make_round_sphere,
    make_tabulated_profile,
    profile_from_spec,
)
from .testfunctions import TestFunction, exponential, mollified_indicator, smooth_bump, zero_function
from .laplace import equivariant_spectrum, extrapolated_spectrum
from .measure import convergence_study, expansion_prediction, spectral_measure
from .invariants import (
    InvariantCurve,
    default_lambda_grid,
    first_invariant_smooth,
    invariant_curves,
    second_invariant_smooth,
)
from .inverse import detect_c, reconstruct, roundtrip
from .estimators import InvariantCurveTransformer, ProfileReconstructor
