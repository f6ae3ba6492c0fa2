"""Numerical kernel: erf, sigma prediction and the three error-rate formulas.

All offsets are measured from the target center and the endpoint mean is
taken to be the target center. Sizes and standard deviations are in pixels.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, special

from .errors import DomainError, InvalidSigmaError, NumericalError

SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class Axis(str, enum.Enum):
    X = "x"
    Y = "y"


class Form(str, enum.Enum):
    ONE_VAR = "1var"
    THREE_VAR = "3var"

    @property
    def n_coefficients(self) -> int:
        return 2 if self is Form.ONE_VAR else 4


def _as_axis(axis) -> Axis:
    try:
        return Axis(axis.value if isinstance(axis, Axis) else str(axis).lower())
    except ValueError:
        raise DomainError(f"unknown axis {axis!r}; expected 'x' or 'y'") from None


def _as_form(form) -> Form:
    if isinstance(form, Form):
        return form
    aliases = {"1var": Form.ONE_VAR, "onevar": Form.ONE_VAR, "1": Form.ONE_VAR,
               "3var": Form.THREE_VAR, "threevar": Form.THREE_VAR, "3": Form.THREE_VAR}
    try:
        return aliases[str(form).lower()]
    except KeyError:
        raise DomainError(f"unknown form {form!r}; expected '1var' or '3var'") from None


@dataclass(frozen=True)
class TargetGeometry:
    width: float
    height: float

    def __post_init__(self):
        if not (math.isfinite(self.width) and math.isfinite(self.height)):
            raise DomainError(f"target size must be finite, got {self.width}x{self.height}")
        if self.width <= 0 or self.height <= 0:
            raise DomainError(f"target size must be positive, got {self.width}x{self.height}")


@dataclass(frozen=True)
class SigmaModel:
    """Linear predictor of the endpoint standard deviation along one axis.

    For axis X the primary size is W and the other size is H; for axis Y the
    roles swap. ``ONE_VAR`` uses ``intercept + primary_slope * size``;
    ``THREE_VAR`` adds ``cross_slope * other + interaction_slope * size / other``.
    """

    axis: Axis
    form: Form
    intercept: float
    primary_slope: float
    cross_slope: Optional[float] = None
    interaction_slope: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "axis", _as_axis(self.axis))
        object.__setattr__(self, "form", _as_form(self.form))
        extra = (self.cross_slope, self.interaction_slope)
        if self.form is Form.ONE_VAR and any(v is not None for v in extra):
            raise DomainError("a 1-variable model carries exactly two coefficients")
        if self.form is Form.THREE_VAR and any(v is None for v in extra):
            raise DomainError("a 3-variable model carries exactly four coefficients")
        if not all(math.isfinite(c) for c in self.coefficients):
            raise DomainError("sigma model coefficients must be finite")

    @classmethod
    def from_coefficients(cls, axis, form, coefficients) -> "SigmaModel":
        form = _as_form(form)
        coefficients = [float(c) for c in coefficients]
        if len(coefficients) != form.n_coefficients:
            raise DomainError(
                f"{form.value} model needs {form.n_coefficients} coefficients, "
                f"got {len(coefficients)}"
            )
        return cls(axis, form, *coefficients)

    @property
    def coefficients(self) -> tuple:
        if self.form is Form.ONE_VAR:
            return (self.intercept, self.primary_slope)
        return (self.intercept, self.primary_slope, self.cross_slope, self.interaction_slope)

    def design_row(self, width, height):
        return design_matrix(self.axis, self.form, width, height)

    def predict(self, width, height) -> np.ndarray:
        """Vectorized sigma prediction; raises if any value is not positive."""
        X = design_matrix(self.axis, self.form, width, height)
        sigma = X @ np.asarray(self.coefficients)
        bad = ~(sigma > 0)
        if np.any(bad):
            w = np.broadcast_to(np.asarray(width, dtype=float), sigma.shape)[bad][0]
            h = np.broadcast_to(np.asarray(height, dtype=float), sigma.shape)[bad][0]
            raise InvalidSigmaError(
                f"sigma_{self.axis.value} model predicts {sigma[bad][0]:.6g} <= 0 "
                f"at W={w:g}, H={h:g}; geometry is outside the model's validity range"
            )
        return sigma


def design_matrix(axis, form, width, height) -> np.ndarray:
    """Predictor columns for a sigma model.

    1-variable: ``[1, size]``. 3-variable: ``[1, size, other, size/other]``
    where ``(size, other)`` is ``(W, H)`` for axis x and ``(H, W)`` for axis y.
    """
    axis, form = _as_axis(axis), _as_form(form)
    w = np.atleast_1d(np.asarray(width, dtype=float))
    h = np.atleast_1d(np.asarray(height, dtype=float))
    w, h = np.broadcast_arrays(w, h)
    size, other = (w, h) if axis is Axis.X else (h, w)
    if form is Form.ONE_VAR:
        return np.column_stack([np.ones_like(size), size])
    if np.any(other == 0):
        raise DomainError("3-variable sigma model needs W and H strictly positive")
    return np.column_stack([np.ones_like(size), size, other, size / other])


@dataclass(frozen=True)
class EndpointDistribution:
    sigma_x: float
    sigma_y: float
    rho: float = 0.0
    mu_x: float = 0.0
    mu_y: float = 0.0

    def __post_init__(self):
        _check_sigma(self.sigma_x, "sigma_x")
        _check_sigma(self.sigma_y, "sigma_y")
        if not (math.isfinite(self.rho) and abs(self.rho) < 1):
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho}")


def _check_sigma(value, name="sigma"):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be finite and > 0, got {value}")


def erf(x):
    """Gauss error function for a scalar or array.

    Scalars go through :func:`math.erf`, arrays through :func:`scipy.special.erf`;
    both are accurate to a few ulp. Non-finite input raises :class:`DomainError`.
    """
    if np.ndim(x) == 0:
        x = float(x)
        if not math.isfinite(x):
            raise DomainError(f"erf argument must be finite, got {x}")
        return math.erf(x)
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("erf argument must be finite")
    return special.erf(arr)


def predict_sigma(model: SigmaModel, geometry: TargetGeometry) -> float:
    return float(model.predict(geometry.width, geometry.height)[0])


def error_rate_1d(size, sigma):
    """Probability that a centered normal endpoint falls outside ``[-size/2, size/2]``."""
    _check_sigma(sigma)
    if np.any(np.asarray(size) < 0):
        raise DomainError(f"size must be >= 0, got {size}")
    return 1.0 - erf(np.divide(size, 2.0 * SQRT2 * np.asarray(sigma, dtype=float)))


def error_rate_2d(geometry: TargetGeometry, sigma_x, sigma_y):
    """Miss probability of an uncorrelated bivariate normal on a W x H rectangle."""
    _check_sigma(sigma_x, "sigma_x")
    _check_sigma(sigma_y, "sigma_y")
    return product_error_rate(geometry.width, geometry.height, sigma_x, sigma_y)


def product_error_rate(width, height, sigma_x, sigma_y):
    """Array form of :func:`error_rate_2d` without geometry validation."""
    hit_x = erf(np.divide(width, 2.0 * SQRT2 * np.asarray(sigma_x, dtype=float)))
    hit_y = erf(np.divide(height, 2.0 * SQRT2 * np.asarray(sigma_y, dtype=float)))
    return 1.0 - hit_x * hit_y


def error_rate_bivariate(geometry: TargetGeometry, dist: EndpointDistribution,
                         tol: float = 1e-10) -> float:
    """Miss probability of a correlated bivariate normal on the centered rectangle.

    In standardized units the rectangle is ``|u| <= a, |v| <= b``. Conditioning on
    ``u`` leaves ``v ~ N(rho*u, 1 - rho**2)``, so the miss probability is
    ``P(|u| > a) + integral_{-a}^{a} phi(u) * P(|v| > b | u) du``. The remaining
    one-dimensional integral is smooth and handled by adaptive Gauss-Kronrod
    quadrature. Mean offsets in ``dist`` are ignored.
    """
    if not abs(dist.rho) < 1:
        raise DomainError(f"rho must lie in (-1, 1), got {dist.rho}")
    a = geometry.width / (2.0 * dist.sigma_x)
    b = geometry.height / (2.0 * dist.sigma_y)
    rho = float(dist.rho)
    s = math.sqrt(1.0 - rho * rho)

    def miss_given_u(u):
        return _INV_SQRT_2PI * math.exp(-0.5 * u * u) * (
            special.ndtr((rho * u - b) / s) + special.ndtr((-b - rho * u) / s)
        )

    outside_x = math.erfc(a / SQRT2)
    inner, abserr, info = integrate.quad(
        miss_given_u, -a, a, epsabs=tol, epsrel=tol, limit=200, full_output=1
    )[:3]
    if abserr > 1e-8:
        raise NumericalError(
            f"bivariate quadrature did not converge: abserr={abserr:.3g} after "
            f"{info['neval']} evaluations (a={a:.6g}, b={b:.6g}, rho={rho})"
        )
    return min(max(outside_x + inner, 0.0), 1.0)
