"""Exception types raised across the package."""


class QuadstressError(Exception):
    """Base class for all package errors."""


class UnsupportedDegreeError(QuadstressError, ValueError):
    """Newton-Cotes base degree outside the supported 1..8 range."""


class ConstructionError(QuadstressError, ValueError):
    """Invalid inputs to a rule or spline constructor."""


class DomainError(QuadstressError, ValueError):
    """Evaluation point outside the spline's interval."""


class EvaluationError(QuadstressError, ArithmeticError):
    """Integrand returned a non-finite value at a quadrature node."""


class DiscontinuityError(QuadstressError, ArithmeticError):
    """Two-sided derivative requested where the one-sided values disagree.

    Carries both one-sided values as ``left`` and ``right`` attributes.
    """

    def __init__(self, message, left, right):
        super().__init__(message)
        self.left = left
        self.right = right


class NonConvergenceError(QuadstressError, ArithmeticError):
    """An iterative procedure failed to reach its tolerance."""


class InsufficientDataError(QuadstressError, ValueError):
    """Not enough usable records for a fit."""


class ConfigError(QuadstressError, ValueError):
    """Invalid experiment configuration; message names the offending field."""
