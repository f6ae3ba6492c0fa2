"""Three-stage outlier screening: spatial accidents, per-session MT, per-worker MT.

Stages run in a fixed order and each sees only the survivors of the previous
one. Re-screening cleaned data can remove more trials; the pipeline is not
idempotent.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .aggregation import Trials, as_trial_frame
from .errors import InsufficientDataError

IQR_MULTIPLIER = 3.0


@dataclass
class ScreeningReport:
    n_input: int
    n_spatial_removed: int
    n_trial_iqr_removed: int
    outlier_worker_ids: List[str] = field(default_factory=list)
    n_participant_removed: int = 0
    n_output: int = 0
    removal_pct: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def movement_distance(trials: Trials) -> np.ndarray:
    """Distance from the start point (previous target center) to the first click.

    The start point sits ``amplitude`` pixels behind the target along the movement
    direction ``(cos a, -sin a)`` in screen axes.
    """
    df = as_trial_frame(trials)
    theta = np.deg2rad(df["angle_deg"].to_numpy(dtype=float))
    amp = df["amplitude"].to_numpy(dtype=float)
    x = df["click_dx"].to_numpy(dtype=float) + amp * np.cos(theta)
    y = df["click_dy"].to_numpy(dtype=float) - amp * np.sin(theta)
    return np.hypot(x, y)


def flag_spatial_outliers(trials: Trials) -> np.ndarray:
    """True where the first click travelled less than half the amplitude."""
    df = as_trial_frame(trials)
    return movement_distance(df) < df["amplitude"].to_numpy(dtype=float) / 2.0


def iqr_bounds(values: Sequence[float], group: str = "values",
               k: float = IQR_MULTIPLIER) -> Tuple[float, float]:
    """``(Q1 - k*IQR, Q3 + k*IQR)`` with linearly interpolated quartiles (k=3)."""
    v = np.asarray(values, dtype=float)
    if v.size < 4:
        raise InsufficientDataError(f"{group}: {v.size} value(s), quartiles need at least 4")
    q1, q3 = np.percentile(v, [25, 75], method="linear")
    iqr = q3 - q1
    return float(q1 - k * iqr), float(q3 + k * iqr)


def _session_bounds(df: pd.DataFrame, k: float) -> pd.DataFrame:
    """Per-(worker, session) MT fences, same quartile rule as :func:`iqr_bounds`."""
    grouped = df.groupby(["worker_id", "session_index"], sort=True)["movement_time_ms"]
    sizes = grouped.size()
    small = sizes[sizes < 4]
    if len(small):
        (worker, session), n = next(iter(small.items()))
        raise InsufficientDataError(
            f"worker {worker} session {session}: {n} value(s), quartiles need at least 4"
        )
    q = grouped.quantile([0.25, 0.75], interpolation="linear").unstack()
    iqr = q[0.75] - q[0.25]
    return pd.DataFrame({"lo": q[0.25] - k * iqr, "hi": q[0.75] + k * iqr})


def _outlier_workers(df: pd.DataFrame, k: float) -> List:
    means = df.groupby("worker_id", sort=True)["movement_time_ms"].mean()
    lo, hi = iqr_bounds(means.to_numpy(), group=f"worker mean MT ({len(means)} workers)", k=k)
    return [w for w, m in means.items() if m < lo or m > hi]


class OutlierScreener(TransformerMixin, BaseEstimator):
    """Estimator wrapper around the screening pipeline.

    ``fit`` learns per-session MT bounds and the set of outlier workers;
    ``transform`` drops the matching trials. ``fit_transform`` on a dataset gives
    the same survivors as :func:`screen_trials`.
    """

    def __init__(self, iqr_multiplier: float = IQR_MULTIPLIER):
        self.iqr_multiplier = iqr_multiplier

    def fit(self, X, y=None):
        df = as_trial_frame(X)
        n_input = len(df)
        spatial = flag_spatial_outliers(df)
        stage1 = df.loc[~spatial]
        self.session_bounds_ = _session_bounds(stage1, self.iqr_multiplier)
        keep = self._within_session_bounds(stage1)
        stage2 = stage1.loc[keep]
        self.outlier_worker_ids_ = _outlier_workers(stage2, self.iqr_multiplier)
        n_participant = int(stage2["worker_id"].isin(self.outlier_worker_ids_).sum())
        n_output = len(stage2) - n_participant
        self.report_ = ScreeningReport(
            n_input=n_input,
            n_spatial_removed=int(spatial.sum()),
            n_trial_iqr_removed=int((~keep).sum()),
            outlier_worker_ids=[str(w) for w in self.outlier_worker_ids_],
            n_participant_removed=n_participant,
            n_output=n_output,
            removal_pct=100.0 * (n_input - n_output) / n_input if n_input else 0.0,
        )
        return self

    def _within_session_bounds(self, df: pd.DataFrame) -> np.ndarray:
        keys = pd.MultiIndex.from_arrays([df["worker_id"], df["session_index"]])
        bounds = self.session_bounds_.reindex(keys)
        missing = bounds["lo"].isna().to_numpy()
        if missing.any():
            raise InsufficientDataError(f"no fitted MT bounds for session {keys[np.argmax(missing)]}")
        mt = df["movement_time_ms"].to_numpy(dtype=float)
        return (mt >= bounds["lo"].to_numpy()) & (mt <= bounds["hi"].to_numpy())

    def transform(self, X) -> pd.DataFrame:
        check_is_fitted(self, "report_")
        df = as_trial_frame(X)
        df = df.loc[~flag_spatial_outliers(df)]
        df = df.loc[self._within_session_bounds(df)]
        return df.loc[~df["worker_id"].isin(self.outlier_worker_ids_)]


def screen_trials(trials: Trials) -> Tuple[pd.DataFrame, ScreeningReport]:
    """Run spatial, session-MT and worker-MT screening in that order."""
    screener = OutlierScreener()
    clean = screener.fit(trials).transform(trials)
    return clean.reset_index(drop=True), screener.report_
