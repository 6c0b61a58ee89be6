"""Unitary Hermite polynomials, the free unitary normal law, and their applications.

Submodules
----------
scaledarith   signed log-scale numbers and arrays
polycore      polynomial families and finite free convolutions
zetasolver    the root of ``zeta - t tan(zeta) = theta``
freenormal    density, moments, CDF and transforms of the free unitary normal law
circleroots   certified zeroes on the unit circle
curieweiss    Curie-Weiss partition function, free energy and Lee-Yang zeroes
heatflow      backward heat flow on real-rooted polynomials
saddle        saddle-point asymptotics inside the disk
"""

from .errors import (CertificationError, DomainError, PoleError, QuadratureError,
                     SolverError, UHermiteError)
from .scaledarith import ScaledArray, SignedScaled, log_binomial, ss_add, ss_mul
from .polycore import (CirclePoly, RealPoly, classical_hermite, demoivre_laplace_product,
                       finite_free_add, finite_free_mult, poly_derivative, poly_eval,
                       unitary_hermite)
from .zetasolver import ZetaConfig, ZetaValue, zeta, zeta_array, zeta_boundary_line
from .freenormal import FreeNormalParams
from .circleroots import (EmpiricalCircleMeasure, EvalPrecision, circle_function,
                          empirical_moment, find_roots, hermite_roots, kolmogorov_distance,
                          newton_girard_reference, psi_empirical)
from .curieweiss import CWParams
from .heatflow import TrigPoly

__version__ = "0.1.0"

__all__ = [
    "CertificationError", "DomainError", "PoleError", "QuadratureError", "SolverError",
    "UHermiteError", "ScaledArray", "SignedScaled", "log_binomial", "ss_add", "ss_mul",
    "CirclePoly", "RealPoly", "classical_hermite", "demoivre_laplace_product",
    "finite_free_add", "finite_free_mult", "poly_derivative", "poly_eval", "unitary_hermite",
    "ZetaConfig", "ZetaValue", "zeta", "zeta_array", "zeta_boundary_line",
    "FreeNormalParams", "EmpiricalCircleMeasure", "EvalPrecision", "circle_function",
    "empirical_moment", "find_roots", "hermite_roots", "kolmogorov_distance",
    "newton_girard_reference", "psi_empirical", "CWParams", "TrigPoly",
]
