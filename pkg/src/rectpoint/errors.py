"""Exception hierarchy.

The CLI maps each family to an exit code: data/format problems exit 2,
numerical failures exit 3, configuration mistakes are usage errors (exit 1).
"""


class RectPointError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 2


class DomainError(RectPointError, ValueError):
    """An argument lies outside the domain of the operation."""


class InsufficientDataError(RectPointError, ValueError):
    """Too few observations in a group for the requested statistic."""


class FormatError(RectPointError, ValueError):
    """A file does not match the expected layout."""


class ConfigurationError(RectPointError, ValueError):
    exit_code = 1


class ComparisonError(RectPointError, ValueError):
    """Two fits cannot be compared (different data or axis)."""


class NumericalError(RectPointError, ArithmeticError):
    exit_code = 3


class InvalidSigmaError(NumericalError, DomainError):
    """A sigma model predicted a non-positive standard deviation."""

    exit_code = 3


class CollinearityError(NumericalError):
    """The design matrix is rank deficient."""


class DegenerateFitError(NumericalError):
    """The fit is exact, so quantities like AIC are undefined."""
