"""Error-rate prediction accuracy and shuffle-split cross-validation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import List, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .aggregation import ConditionStats
from .core import SigmaModel, _as_form, product_error_rate
from .errors import ConfigurationError, DomainError, InsufficientDataError, RectPointError
from .fitting import SigmaRegressor


def prediction_metrics(observed_pct, predicted_pct) -> dict:
    """R^2, MAE and RMSE of predicted against observed error rates (percent).

    R^2 is the coefficient of determination about the observed mean and may be
    negative. ``r2_pearson`` is the squared correlation, given for comparison.
    """
    obs = np.asarray(observed_pct, dtype=float)
    pred = np.asarray(predicted_pct, dtype=float)
    if obs.shape != pred.shape or obs.ndim != 1:
        raise DomainError(f"observed and predicted must be equal-length 1-D, got {obs.shape} and {pred.shape}")
    if len(obs) < 2:
        raise InsufficientDataError("prediction metrics need at least two conditions")
    err = obs - pred
    centered = obs - obs.mean()
    tss = float(centered @ centered)
    if tss == 0.0:
        raise InsufficientDataError("observed error rates have zero variance; R^2 is undefined")
    pc = pred - pred.mean()
    spp = float(pc @ pc)
    r_pearson = float(centered @ pc) / math.sqrt(tss * spp) if spp > 0 else 0.0
    return {
        "r2": 1.0 - float(err @ err) / tss,
        "mae_pct": float(np.mean(np.abs(err))),
        "rmse_pct": float(np.sqrt(np.mean(err * err))),
        "r2_pearson": r_pearson * r_pearson,
    }


def predict_er_table(model_x: SigmaModel, model_y: SigmaModel, conditions) -> np.ndarray:
    """Predicted error rate (percent) for each condition's W x H target."""
    w = np.array([c.width for c in conditions], dtype=float)
    h = np.array([c.height for c in conditions], dtype=float)
    return 100.0 * product_error_rate(w, h, model_x.predict(w, h), model_y.predict(w, h))


class ErrorRateModel(BaseEstimator):
    """Predict error rates from target width and height.

    ``fit`` takes ``X`` = (width, height) rows and ``y`` = (sigma_x, sigma_y)
    rows and fits one :class:`SigmaRegressor` per axis. ``predict`` returns the
    error rate in percent; ``score`` compares it against observed percentages.
    """

    def __init__(self, form: str = "3var"):
        self.form = form

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, multi_output=True)
        if y.ndim != 2 or y.shape[1] != 2:
            raise DomainError("y must have two columns (sigma_x, sigma_y)")
        form = _as_form(self.form).value
        self.regressor_x_ = SigmaRegressor(axis="x", form=form).fit(X, y[:, 0])
        self.regressor_y_ = SigmaRegressor(axis="y", form=form).fit(X, y[:, 1])
        self.model_x_ = self.regressor_x_.sigma_model_
        self.model_y_ = self.regressor_y_.sigma_model_
        self.n_features_in_ = 2
        return self

    def fit_conditions(self, conditions: Sequence[ConditionStats]):
        X, y = conditions_xy(conditions)
        return self.fit(X, y)

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "model_x_")
        X = check_array(X, dtype=float)
        w, h = X[:, 0], X[:, 1]
        return 100.0 * product_error_rate(w, h, self.model_x_.predict(w, h), self.model_y_.predict(w, h))

    def score(self, X, y) -> float:
        return prediction_metrics(y, self.predict(X))["r2"]


def conditions_xy(conditions: Sequence[ConditionStats]):
    X = np.array([[c.width, c.height] for c in conditions], dtype=float)
    y = np.array([[c.sigma_x, c.sigma_y] for c in conditions], dtype=float)
    return X, y


@dataclass
class CvReport:
    form: str
    train_ratio: float
    iterations: int
    mean_r2: float
    mean_mae_pct: float
    mean_rmse_pct: float
    seed: int
    n_train: int
    n_test: int
    mean_r2_pearson: float
    per_iteration: List[dict] = field(default_factory=list, repr=False)

    def to_dict(self, include_iterations: bool = False) -> dict:
        d = asdict(self)
        if not include_iterations:
            d.pop("per_iteration")
        return d


class CrossValidationError(RectPointError):
    """A cross-validation iteration failed; carries the iteration index."""

    def __init__(self, iteration: int, cause: Exception):
        super().__init__(f"iteration {iteration} failed: {cause}")
        self.iteration = iteration
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)


def split_sizes(n_conditions: int, train_ratio: float):
    """``(ceil(ratio * N), N - ceil(ratio * N))``."""
    # round first so 0.6 * 10 = 6.000000000000001 does not ceil to 7
    n_train = math.ceil(round(train_ratio * n_conditions, 9))
    return n_train, n_conditions - n_train


def shuffle_split_cv(conditions: Sequence[ConditionStats], form="3var", train_ratio: float = 0.7,
                     iterations: int = 100, seed: int = 0) -> CvReport:
    """Repeated random train/test split over target conditions.

    Iteration ``i`` draws its training set with a generator seeded from
    ``(seed, i)``, fits both sigma models on it and scores the predicted error
    rates of the held-out conditions. ``train_ratio=1`` scores the training set
    itself and allows a single iteration only.
    """
    form = _as_form(form)
    rows = sorted(conditions, key=lambda c: (c.width, c.height))
    N = len(rows)
    if N < 5:
        raise InsufficientDataError(f"cross-validation needs at least 5 conditions, got {N}")
    if not 0 < train_ratio <= 1:
        raise ConfigurationError(f"train_ratio must lie in (0, 1], got {train_ratio}")
    if iterations < 1:
        raise ConfigurationError(f"iterations must be >= 1, got {iterations}")
    n_train, n_test = split_sizes(N, train_ratio)
    all_data = train_ratio == 1
    if all_data and iterations > 1:
        raise ConfigurationError("train_ratio=1 leaves no test conditions; use a single iteration")
    if not all_data and n_test < 2:
        raise ConfigurationError(f"train_ratio={train_ratio} leaves {n_test} test condition(s) of {N}")

    X, y = conditions_xy(rows)
    observed = np.array([c.error_rate_pct for c in rows])
    per_iteration = []
    for i in range(iterations):
        if all_data:
            train = test = np.arange(N)
        else:
            rng = np.random.default_rng([seed, i])
            train = np.sort(rng.choice(N, size=n_train, replace=False))
            test = np.setdiff1d(np.arange(N), train)
        try:
            model = ErrorRateModel(form=form.value).fit(X[train], y[train])
            metrics = prediction_metrics(observed[test], model.predict(X[test]))
        except RectPointError as exc:
            raise CrossValidationError(i, exc) from exc
        metrics["train"] = train.tolist()
        per_iteration.append(metrics)

    def mean(key):
        return float(np.mean([m[key] for m in per_iteration]))

    return CvReport(
        form=form.value,
        train_ratio=float(train_ratio),
        iterations=iterations,
        mean_r2=mean("r2"),
        mean_mae_pct=mean("mae_pct"),
        mean_rmse_pct=mean("rmse_pct"),
        seed=int(seed),
        n_train=n_train,
        n_test=N if all_data else n_test,
        mean_r2_pearson=mean("r2_pearson"),
        per_iteration=per_iteration,
    )
