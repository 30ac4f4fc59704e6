"""Point-source potentials of a two-layer medium and independent checks of them.

The closed form lives in :mod:`layergreen.medium`.  :mod:`layergreen.spectral`
rebuilds it from its horizontal Fourier transform, :mod:`layergreen.fd`
solves the PDE on a grid, :mod:`layergreen.local_frame` studies curved
interfaces and :mod:`layergreen.inverse` the blow-up of the orthogonality
integral.
"""

from .exceptions import (AmbiguousSideError, NonConvergenceError, SingularEvaluationError,
                         SingularFrequencyError)
from .fd import (BoxGrid, Bump, CoefficientField, SolveReport, build_system,
                 compare_to_closed_form, conjugate_gradient, solve_system, weak_identity_check)
from .inverse import ProbeConfig, blowup_exponent, kernel_integral, orthogonality_integral
from .local_frame import (LocalFrame, SurfaceGraph, asymptotic_error_experiment, frame_at,
                          frozen_green)
from .medium import (LayeredMedium, Side, bounds, contrast, green_gradient, green_value,
                     interface_trace, mirror_distance, singular_coefficient)
from .quadrature import QuadratureSpec
from .spectral import (ProfileQuery, bessel_j0, hankel_invert, laplace_hankel_check, profile_w,
                       verify_profile_ode)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousSideError", "NonConvergenceError", "SingularEvaluationError",
    "SingularFrequencyError", "BoxGrid", "Bump", "CoefficientField", "SolveReport",
    "build_system", "compare_to_closed_form", "conjugate_gradient", "solve_system",
    "weak_identity_check", "ProbeConfig", "blowup_exponent", "kernel_integral",
    "orthogonality_integral", "LocalFrame", "SurfaceGraph", "asymptotic_error_experiment",
    "frame_at", "frozen_green", "LayeredMedium", "Side", "bounds", "contrast",
    "green_gradient", "green_value", "interface_trace", "mirror_distance",
    "singular_coefficient", "QuadratureSpec", "ProfileQuery", "bessel_j0", "hankel_invert",
    "laplace_hankel_check", "profile_w", "verify_profile_ode",
]
