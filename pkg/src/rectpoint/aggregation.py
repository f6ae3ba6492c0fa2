"""Per-condition endpoint statistics from screened trial logs."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Iterable, List, Sequence, Union

import numpy as np
import pandas as pd

from .errors import DomainError, FormatError, InsufficientDataError


@dataclass(frozen=True)
class TrialRecord:
    """One pointing trial.

    ``click_dx``/``click_dy`` is the first click relative to the target center in
    screen axes (y grows downward). ``angle_deg`` is the nominal movement direction,
    counter-clockwise as seen on screen; it is kept for screening geometry and
    never used for prediction.
    """

    worker_id: str
    session_index: int
    width: float
    height: float
    angle_deg: float
    amplitude: float
    trial_index: int
    click_dx: float
    click_dy: float
    movement_time_ms: float
    is_error: bool

    def __post_init__(self):
        if not self.amplitude > 0:
            raise DomainError(f"amplitude must be > 0, got {self.amplitude}")
        if not self.movement_time_ms > 0:
            raise DomainError(f"movement_time_ms must be > 0, got {self.movement_time_ms}")
        if self.trial_index < 0:
            raise DomainError(f"trial_index must be >= 0, got {self.trial_index}")


TRIAL_COLUMNS = [f.name for f in fields(TrialRecord)]

Trials = Union[pd.DataFrame, Iterable[TrialRecord]]


@dataclass(frozen=True)
class ConditionStats:
    width: float
    height: float
    n: int
    sigma_x: float
    sigma_y: float
    rho: float
    mu_x: float
    mu_y: float
    error_rate_pct: float


CONDITION_COLUMNS = [f.name for f in fields(ConditionStats)]


def as_trial_frame(trials: Trials) -> pd.DataFrame:
    """Return trials as a DataFrame with the :class:`TrialRecord` columns."""
    if isinstance(trials, pd.DataFrame):
        missing = [c for c in TRIAL_COLUMNS if c not in trials.columns]
        if missing:
            raise FormatError(f"trial table lacks columns {missing}")
        return trials
    records = list(trials)
    if records and not isinstance(records[0], TrialRecord):
        raise DomainError("expected TrialRecord objects or a DataFrame")
    return pd.DataFrame([asdict(r) for r in records], columns=TRIAL_COLUMNS)


def frame_to_trials(df: pd.DataFrame) -> List[TrialRecord]:
    return [TrialRecord(**row) for row in df[TRIAL_COLUMNS].to_dict("records")]


def pearson_rho(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation; 0 when either variable has zero variance."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError(f"pearson_rho needs two equal-length 1-D sequences, got {x.shape} and {y.shape}")
    if len(x) < 2:
        raise DomainError("pearson_rho needs at least two pairs")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    r = float(xc @ yc) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def condition_stats(width, height, dx, dy, is_error) -> ConditionStats:
    dx = np.asarray(dx, dtype=float)
    dy = np.asarray(dy, dtype=float)
    n = len(dx)
    if n < 2:
        raise InsufficientDataError(
            f"condition W={width:g}, H={height:g} has {n} trial(s); at least 2 are needed"
        )
    return ConditionStats(
        width=float(width),
        height=float(height),
        n=n,
        sigma_x=float(np.std(dx, ddof=1)),
        sigma_y=float(np.std(dy, ddof=1)),
        rho=pearson_rho(dx, dy),
        mu_x=float(dx.mean()),
        mu_y=float(dy.mean()),
        error_rate_pct=100.0 * float(np.count_nonzero(is_error)) / n,
    )


def aggregate_conditions(trials: Trials) -> List[ConditionStats]:
    """Pool all workers, sessions and angles into one row per (width, height).

    Rows come back sorted by ``(width, height)``; input order does not matter.
    """
    df = as_trial_frame(trials)
    if len(df) == 0:
        raise InsufficientDataError("no trials to aggregate")
    out = []
    for (w, h), g in df.groupby(["width", "height"], sort=True):
        # sort within the group so floating sums do not depend on input order
        g = g.sort_values(["click_dx", "click_dy", "is_error"], kind="mergesort")
        out.append(condition_stats(w, h, g["click_dx"], g["click_dy"], g["is_error"].astype(bool)))
    return out


def conditions_to_frame(conditions: Sequence[ConditionStats]) -> pd.DataFrame:
    return pd.DataFrame([asdict(c) for c in conditions], columns=CONDITION_COLUMNS)


def frame_to_conditions(df: pd.DataFrame) -> List[ConditionStats]:
    rows = df.sort_values(["width", "height"], kind="mergesort")
    return [
        ConditionStats(**{k: (int(v) if k == "n" else float(v)) for k, v in row.items()})
        for row in rows[CONDITION_COLUMNS].to_dict("records")
    ]
