"""Exponential functionals of hypergeometric Levy processes.

Mellin transforms through the Barnes double gamma function, convergent and
asymptotic series for the density, numerical Mellin inversion and Monte
Carlo oracles, and applications to stable processes.
"""

from .applications import (RadialSpec, entrance_law_up, excursion_entrance_law,
                           last_passage_density, lifetime_density_down, radial_entrance_law,
                           supremum_cdf, supremum_density)
from .errors import (AdmissibilityError, CancellationError, ConvergenceError, DegeneracyError,
                     DomainError, LevyExpError, NumericalError, PoleError, RationalAlphaError,
                     ValidationError)
from .mellin import ExpFunctionalSpec, mellin_full, mellin_M
from .oracle import (SimulationConfig, mc_moment, mellin_invert, mellin_invert_density,
                     simulate_exponential_functional, simulate_stable_supremum, stable_sample)
from .process import HypergeometricParams, StableParams, classify, laplace_exponent
from .series import density
from .special import DoubleGammaEvaluator, double_gamma_calibrate, double_gamma_log

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError", "CancellationError", "ConvergenceError", "DegeneracyError",
    "DomainError", "DoubleGammaEvaluator", "ExpFunctionalSpec", "HypergeometricParams",
    "LevyExpError", "NumericalError", "PoleError", "RadialSpec", "RationalAlphaError",
    "SimulationConfig", "StableParams", "ValidationError", "classify", "density",
    "double_gamma_calibrate", "double_gamma_log", "entrance_law_up", "excursion_entrance_law",
    "last_passage_density", "laplace_exponent", "lifetime_density_down", "mc_moment",
    "mellin_M", "mellin_full", "mellin_invert", "mellin_invert_density", "radial_entrance_law",
    "simulate_exponential_functional", "simulate_stable_supremum", "stable_sample", "supremum_cdf",
    "supremum_density",
]
