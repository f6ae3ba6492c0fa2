"""Least-squares fits of the sigma models and AIC-based comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .aggregation import ConditionStats
from .core import Axis, Form, SigmaModel, _as_axis, _as_form, design_matrix
from .errors import (
    CollinearityError,
    ComparisonError,
    DegenerateFitError,
    DomainError,
    InsufficientDataError,
)

SIGNIFICANT_DELTA_AIC = 2.0
_RANK_TOL = 1e-10


@dataclass(frozen=True)
class OlsResult:
    coefficients: np.ndarray
    std_errors: np.ndarray
    residuals: np.ndarray
    rss: float
    tss: float
    r2: float
    n: int
    k: int


def ols_fit(predictor_rows, responses) -> OlsResult:
    """Ordinary least squares through a QR decomposition.

    ``predictor_rows`` must already contain the intercept column. R^2 is
    ``1 - RSS/TSS`` with TSS about the response mean; when the responses are
    constant R^2 is reported as 0.
    """
    X = np.asarray(predictor_rows, dtype=float)
    y = np.asarray(responses, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise DomainError(f"incompatible shapes {X.shape} and {y.shape}")
    n, k = X.shape
    if n < k + 1:
        raise InsufficientDataError(f"{n} rows cannot fit {k} coefficients (need at least {k + 1})")
    # scale columns so the rank test does not depend on units
    scale = np.linalg.norm(X, axis=0)
    if np.any(scale == 0):
        raise CollinearityError("design matrix has an all-zero column")
    Q, R = np.linalg.qr(X / scale)
    diag = np.abs(np.diag(R))
    if diag.min() <= _RANK_TOL * diag.max():
        raise CollinearityError(
            f"design matrix is rank deficient (min |R_ii| = {diag.min():.3g}); "
            "the conditions do not vary enough to identify every coefficient"
        )
    beta = np.linalg.solve(R, Q.T @ y) / scale
    residuals = y - X @ beta
    rss = float(residuals @ residuals)
    centered = y - y.mean()
    tss = float(centered @ centered)
    r2 = 1.0 - rss / tss if tss > 0 else 0.0
    dof = n - k
    Rinv = np.linalg.inv(R)
    cov_unit = (Rinv @ Rinv.T) / np.outer(scale, scale)
    std_errors = np.sqrt(np.maximum(np.diag(cov_unit), 0.0) * rss / dof)
    return OlsResult(beta, std_errors, residuals, rss, tss, r2, n, k)


def aic(rss: float, n: int, k_coefficients: int) -> float:
    """Gaussian-likelihood AIC, counting the error variance as one more parameter."""
    if n <= k_coefficients:
        raise InsufficientDataError(f"AIC needs n > k, got n={n}, k={k_coefficients}")
    if rss < 0:
        raise DomainError(f"rss must be >= 0, got {rss}")
    if rss == 0:
        raise DegenerateFitError("residual sum of squares is 0; AIC is undefined for an exact fit")
    return n * math.log(rss / n) + 2 * (k_coefficients + 1)


def adjusted_r2(r2: float, n: int, k_coefficients: int) -> float:
    p = k_coefficients - 1
    return 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)


@dataclass(frozen=True)
class FitReport:
    model: SigmaModel
    r2: float
    adj_r2: float
    aic: Optional[float]
    rss: float
    n_points: int
    residuals: tuple
    std_errors: tuple = ()
    fit_data: tuple = field(default=(), repr=False, compare=False)

    def to_dict(self) -> dict:
        names = ("intercept", "primary", "cross", "interaction")
        return {
            "format_version": 1,
            "axis": self.model.axis.value,
            "form": self.model.form.value,
            "coefficients": dict(zip(names, self.model.coefficients)),
            "r2": self.r2,
            "adj_r2": self.adj_r2,
            "aic": self.aic,
            "n_points": self.n_points,
        }


class SigmaRegressor(RegressorMixin, BaseEstimator):
    """Fit endpoint SD along one axis from target size.

    ``X`` has two columns, width and height in pixels; ``y`` is the observed
    standard deviation along ``axis``.

    Parameters
    ----------
    axis : {"x", "y"}
    form : {"1var", "3var"}
        ``"1var"`` regresses on the same-axis size only; ``"3var"`` adds the other
        size and the size ratio (W/H for x, H/W for y).
    """

    def __init__(self, axis: str = "x", form: str = "3var"):
        self.axis = axis
        self.form = form

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        if X.shape[1] != 2:
            raise DomainError(f"X must have two columns (width, height), got {X.shape[1]}")
        if np.any(X <= 0):
            raise DomainError("target sizes must be > 0")
        axis, form = _as_axis(self.axis), _as_form(self.form)
        minimum = 3 if form is Form.ONE_VAR else 5
        if len(y) < minimum:
            raise InsufficientDataError(f"{form.value} fit needs at least {minimum} conditions, got {len(y)}")
        result = ols_fit(design_matrix(axis, form, X[:, 0], X[:, 1]), y)
        self.sigma_model_ = SigmaModel.from_coefficients(axis, form, result.coefficients)
        self.intercept_ = float(result.coefficients[0])
        self.coef_ = result.coefficients[1:].copy()
        self.ols_ = result
        self.n_features_in_ = 2
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "sigma_model_")
        X = check_array(X, dtype=float)
        return self.sigma_model_.predict(X[:, 0], X[:, 1])

    def report(self) -> FitReport:
        check_is_fitted(self, "sigma_model_")
        res = self.ols_
        try:
            value = aic(res.rss, res.n, res.k)
        except DegenerateFitError:
            value = None
        return FitReport(
            model=self.sigma_model_,
            r2=res.r2,
            adj_r2=adjusted_r2(res.r2, res.n, res.k),
            aic=value,
            rss=res.rss,
            n_points=res.n,
            residuals=tuple(res.residuals),
            std_errors=tuple(res.std_errors),
        )


def _condition_arrays(conditions: Sequence[ConditionStats], axis: Axis):
    rows = sorted(conditions, key=lambda c: (c.width, c.height))
    X = np.array([[c.width, c.height] for c in rows], dtype=float)
    y = np.array([c.sigma_x if axis is Axis.X else c.sigma_y for c in rows], dtype=float)
    return X, y


def fit_sigma_model(conditions: Sequence[ConditionStats], form="3var", axis="x") -> FitReport:
    """Fit one axis's sigma model to aggregated conditions (rows sorted by W, H)."""
    axis = _as_axis(axis)
    X, y = _condition_arrays(conditions, axis)
    report = SigmaRegressor(axis=axis.value, form=_as_form(form).value).fit(X, y).report()
    key = (axis, tuple(map(tuple, X)), tuple(y))
    return FitReport(**{**report.__dict__, "fit_data": key})


@dataclass(frozen=True)
class ModelSelection:
    chosen: FitReport
    other: FitReport
    delta_aic: float
    significant: bool


def select_model(fit_a: FitReport, fit_b: FitReport) -> ModelSelection:
    """Prefer the lower-AIC fit; the preference is significant when dAIC > 2."""
    if fit_a.model.axis is not fit_b.model.axis:
        raise ComparisonError("fits are for different axes")
    if fit_a.fit_data and fit_b.fit_data and fit_a.fit_data != fit_b.fit_data:
        raise ComparisonError("fits were computed on different conditions")
    if fit_a.n_points != fit_b.n_points:
        raise ComparisonError(f"fits use {fit_a.n_points} vs {fit_b.n_points} points")
    if fit_a.aic is None or fit_b.aic is None:
        raise DegenerateFitError("cannot compare an exact fit by AIC")
    delta = abs(fit_a.aic - fit_b.aic)
    chosen, other = (fit_a, fit_b) if fit_a.aic <= fit_b.aic else (fit_b, fit_a)
    return ModelSelection(chosen, other, delta, delta > SIGNIFICANT_DELTA_AIC)
