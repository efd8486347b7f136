"""Stress-test quadrature rules with worst-case spline integrands.

Build a rule sequence, construct the adversarial integrand that vanishes at
its nodes, compare the closed-form integral with the (zero) quadrature
result, and measure the empirical convergence order of the error.
"""

from ._kernels import BACKEND
from .adversary import (
    AdversarialSpline,
    MonomialPiece,
    build_global,
    build_local,
    unit_integral,
)
from .analysis import (
    BoundCheck,
    ErrorRecord,
    OrderFit,
    SmoothnessReport,
    adaptive_integral,
    error_sequence,
    fit_order,
    geometric_sizes,
    oracle_integral,
    theorem1_bound_check,
    theorem2_bound_check,
    verify_smoothness,
)
from .errors import (
    ConfigError,
    ConstructionError,
    DiscontinuityError,
    DomainError,
    EvaluationError,
    InsufficientDataError,
    NonConvergenceError,
    QuadstressError,
    UnsupportedDegreeError,
)
from .rules import (
    FAMILY_NAMES,
    Interval,
    QuadratureRule,
    RuleFamily,
    apply,
    clenshaw_curtis,
    composite,
    family_from_name,
    gauss_legendre,
    newton_cotes_base,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "Interval",
    "QuadratureRule",
    "RuleFamily",
    "newton_cotes_base",
    "composite",
    "gauss_legendre",
    "clenshaw_curtis",
    "apply",
    "family_from_name",
    "FAMILY_NAMES",
    "MonomialPiece",
    "AdversarialSpline",
    "build_global",
    "build_local",
    "unit_integral",
    "ErrorRecord",
    "OrderFit",
    "BoundCheck",
    "SmoothnessReport",
    "error_sequence",
    "fit_order",
    "theorem1_bound_check",
    "theorem2_bound_check",
    "verify_smoothness",
    "oracle_integral",
    "adaptive_integral",
    "geometric_sizes",
    "QuadstressError",
    "UnsupportedDegreeError",
    "ConstructionError",
    "DomainError",
    "EvaluationError",
    "DiscontinuityError",
    "NonConvergenceError",
    "InsufficientDataError",
    "ConfigError",
]
