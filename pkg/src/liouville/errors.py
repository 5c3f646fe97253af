"""Exception hierarchy for the liouville package.

Everything raised deliberately by this package derives from
:class:`LiouvilleError`, so callers can catch one type at the boundary.
Builtin exceptions (``ValueError``, ``TypeError``) are still used for
plain argument validation in constructors.
"""

from __future__ import annotations

__all__ = [
    "LiouvilleError",
    "ParseError",
    "EvaluationError",
    "DomainError",
    "EvalOverflow",
    "MonotonicityError",
    "UnsupportedRegimeError",
    "QuadratureError",
    "DivergentIntegralError",
    "CriterionUndecidedError",
    "DeltaSearchError",
    "CliConfigError",
]


class LiouvilleError(Exception):
    """Base class for all package errors."""


class ParseError(LiouvilleError):
    """Raised on malformed expression text.

    Carries the zero-based character offset of the first offending token
    so a caller can point at the problem.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class EvaluationError(LiouvilleError):
    """Base class for failures while evaluating a nonlinearity."""


class DomainError(EvaluationError):
    """A sub-expression left the real domain (log of a non-positive
    value, division by zero, negative base with fractional power, or a
    negative final value where a nonlinearity must be non-negative)."""


class EvalOverflow(EvaluationError):
    """An intermediate or final value exceeded the double range.

    Overflow is reported instead of being saturated to ``inf`` so that
    downstream quadrature never silently integrates garbage.
    """


class MonotonicityError(LiouvilleError):
    """The supplied nonlinearity is not non-decreasing on the tested
    interval and the caller did not waive the monotonicity check."""


class UnsupportedRegimeError(LiouvilleError):
    """Structure exponents with n <= p: the dichotomy question is void
    because every admissible solution is constant."""


class QuadratureError(LiouvilleError):
    """The integrand produced a NaN or infinity at a quadrature node."""


class DivergentIntegralError(LiouvilleError):
    """A value was requested for an integral that diverges."""


class CriterionUndecidedError(LiouvilleError):
    """The numeric classifier could not certify either verdict."""


class DeltaSearchError(LiouvilleError):
    """No admissible scale parameter was found within the halving
    budget."""


class CliConfigError(LiouvilleError):
    """Inconsistent or malformed command line options."""
