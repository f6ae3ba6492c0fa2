"""File formats: trial-log CSV, condition-table CSV and JSON documents.

CSV files start with a ``# format_version: 1`` comment line followed by the
header. JSON documents carry a ``format_version`` field.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import List, Sequence

import numpy as np
import pandas as pd

from .aggregation import CONDITION_COLUMNS, TRIAL_COLUMNS, ConditionStats, conditions_to_frame, frame_to_conditions
from .core import SigmaModel, _as_axis, _as_form
from .errors import FormatError, RectPointError
from .simulator import GroundTruth

FORMAT_VERSION = 1
VERSION_LINE = f"# format_version: {FORMAT_VERSION}\n"

TRIAL_HEADER = ["worker_id", "session_index", "width_px", "height_px", "angle_deg", "amplitude_px",
                "trial_index", "click_dx", "click_dy", "movement_time_ms", "is_error"]
CONDITION_HEADER = ["width_px", "height_px", "n", "sigma_x", "sigma_y", "rho", "mu_x", "mu_y",
                    "error_rate_pct"]
_RENAME = {"width_px": "width", "height_px": "height", "amplitude_px": "amplitude"}
_COEF_NAMES = ("intercept", "primary", "cross", "interaction")


def _write_csv(df: pd.DataFrame, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(VERSION_LINE)
        df.to_csv(fh, index=False, lineterminator="\n", float_format=None)


def _read_csv(path, header: List[str], dtypes: dict) -> pd.DataFrame:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            first = fh.readline()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read ({exc.strerror})") from exc
    skip = 0
    if first.startswith("#"):
        skip = 1
        version = first.lstrip("#").strip()
        if version.replace(" ", "") != f"format_version:{FORMAT_VERSION}":
            raise FormatError(f"{path}:1: unsupported version line {first.strip()!r}")
    try:
        df = pd.read_csv(path, skiprows=skip, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if list(df.columns) != header:
        raise FormatError(f"{path}:{skip + 1}: expected header {','.join(header)}, got {','.join(df.columns)}")
    out = {}
    for col in header:
        kind = dtypes.get(col, float)
        if kind is str:
            out[col] = df[col]
            continue
        raw = df[col].to_numpy()
        try:
            # exact decimal-to-binary conversion, unlike pandas' fast parser
            values = raw.astype(float)
            bad = ~np.isfinite(values)
        except ValueError:
            values = None
            bad = np.array([not _is_float(v) for v in raw])
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise FormatError(f"{path}:{row + skip + 2}: column {col} has invalid value {raw[row]!r}")
        if kind is int and np.any(values != np.round(values)):
            row = int(np.flatnonzero(values != np.round(values))[0])
            raise FormatError(f"{path}:{row + skip + 2}: column {col} must be an integer, got {raw[row]!r}")
        out[col] = values.astype(kind)
    return pd.DataFrame(out)


def _is_float(text) -> bool:
    try:
        return math.isfinite(float(text))
    except ValueError:
        return False


def write_trials(df: pd.DataFrame, path) -> None:
    out = df[TRIAL_COLUMNS].rename(columns={v: k for k, v in _RENAME.items()}).copy()
    out["is_error"] = out["is_error"].astype(bool).astype(int)
    _write_csv(out[TRIAL_HEADER], path)


def read_trials(path) -> pd.DataFrame:
    df = _read_csv(path, TRIAL_HEADER, {"worker_id": str, "session_index": int, "trial_index": int,
                                        "is_error": int})
    if not df["is_error"].isin([0, 1]).all():
        row = int(np.flatnonzero(~df["is_error"].isin([0, 1]).to_numpy())[0])
        raise FormatError(f"{path}:{row + 3}: is_error must be 0 or 1")
    if (df["movement_time_ms"] <= 0).any() or (df["amplitude_px"] <= 0).any():
        raise FormatError(f"{path}: movement_time_ms and amplitude_px must be > 0")
    df["is_error"] = df["is_error"].astype(bool)
    return df.rename(columns=_RENAME)[TRIAL_COLUMNS]


def write_conditions(conditions: Sequence[ConditionStats], path) -> None:
    df = conditions_to_frame(conditions).sort_values(["width", "height"], kind="mergesort")
    _write_csv(df.rename(columns={v: k for k, v in _RENAME.items()})[CONDITION_HEADER], path)


def read_conditions(path) -> List[ConditionStats]:
    df = _read_csv(path, CONDITION_HEADER, {"n": int})
    return frame_to_conditions(df.rename(columns=_RENAME)[CONDITION_COLUMNS])


def dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FormatError(f"{path}: cannot read ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc


def model_to_dict(model: SigmaModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "axis": model.axis.value,
        "form": model.form.value,
        "coefficients": dict(zip(_COEF_NAMES, model.coefficients)),
    }


def model_from_dict(d: dict, source: str = "model", axis=None) -> SigmaModel:
    try:
        form = _as_form(d["form"])
        axis = _as_axis(d.get("axis", axis))
        coefs = d["coefficients"]
        values = [coefs[name] for name in _COEF_NAMES[: form.n_coefficients]]
        return SigmaModel.from_coefficients(axis, form, values)
    except KeyError as exc:
        raise FormatError(f"{source}: missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, RectPointError):
            raise FormatError(f"{source}: {exc}") from exc
        raise FormatError(f"{source}: malformed model ({exc})") from exc


def load_model(path) -> SigmaModel:
    return model_from_dict(load_json(path), source=str(path))


def ground_truth_to_dict(truth: GroundTruth) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "sigma_model_x": model_to_dict(truth.sigma_model_x),
        "sigma_model_y": model_to_dict(truth.sigma_model_y),
        "anisotropy": truth.anisotropy,
        "rho": truth.rho,
        "mt_distribution": {"median_ms": truth.mt_median_ms, "sigma_log": truth.mt_sigma_log},
        "outlier_injection": {"rate": truth.outlier_rate, "inflation": truth.outlier_inflation},
    }


def ground_truth_from_dict(d: dict, source: str = "ground truth") -> GroundTruth:
    try:
        mt = d.get("mt_distribution", {})
        inj = d.get("outlier_injection", {})
        return GroundTruth(
            sigma_model_x=model_from_dict(d["sigma_model_x"], source, axis="x"),
            sigma_model_y=model_from_dict(d["sigma_model_y"], source, axis="y"),
            anisotropy=float(d.get("anisotropy", 1.0)),
            rho=float(d.get("rho", 0.0)),
            mt_median_ms=float(mt.get("median_ms", 900.0)),
            mt_sigma_log=float(mt.get("sigma_log", 0.35)),
            outlier_rate=float(inj.get("rate", 0.0)),
            outlier_inflation=float(inj.get("inflation", 10.0)),
        )
    except KeyError as exc:
        raise FormatError(f"{source}: missing field {exc.args[0]!r}") from exc
    except (TypeError, AttributeError) as exc:
        raise FormatError(f"{source}: malformed ground truth ({exc})") from exc
    except RectPointError as exc:
        raise FormatError(f"{source}: {exc}") from exc


def load_ground_truth(path) -> GroundTruth:
    return ground_truth_from_dict(load_json(path), source=str(path))


def _svg_num(v: float) -> str:
    return f"{v:.2f}"


def scatter_svg(observed_pct, predicted_pct, size: int = 400) -> str:
    """Static observed-vs-predicted scatter with the identity line."""
    obs = np.asarray(observed_pct, dtype=float)
    pred = np.asarray(predicted_pct, dtype=float)
    top = max(1.0, math.ceil(max(obs.max(initial=0), pred.max(initial=0))))
    pad = 40
    span = size - 2 * pad

    def sx(v):
        return pad + span * v / top

    def sy(v):
        return size - pad - span * v / top

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(top)}" y2="{sy(top)}" stroke="#888" stroke-dasharray="4 3"/>',
        f'<line x1="{pad}" y1="{size - pad}" x2="{size - pad}" y2="{size - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{size - pad}" stroke="black"/>',
        f'<text x="{size / 2}" y="{size - 8}" text-anchor="middle" font-size="12">predicted ER (%)</text>',
        f'<text x="12" y="{size / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 12 {size / 2})">observed ER (%)</text>',
        f'<text x="{size - pad}" y="{size - pad + 14}" text-anchor="end" font-size="10">{top:g}</text>',
        f'<text x="{pad - 4}" y="{pad + 4}" text-anchor="end" font-size="10">{top:g}</text>',
    ]
    for o, p in zip(obs, pred):
        parts.append(f'<circle cx="{_svg_num(sx(p))}" cy="{_svg_num(sy(o))}" r="3" fill="#1f77b4"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
