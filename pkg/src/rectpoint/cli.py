"""Command-line front end: simulate, screen, aggregate, fit, predict, crossval, report.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

import pandas as pd

from . import io
from .aggregation import aggregate_conditions
from .core import EndpointDistribution, TargetGeometry, error_rate_2d, error_rate_bivariate
from .errors import ConfigurationError, RectPointError
from .evaluation import predict_er_table, prediction_metrics, shuffle_split_cv
from .fitting import fit_sigma_model
from .reference import PUBLISHED
from .screening import screen_trials
from .simulator import DESIGNS, GroundTruth, generate_experiment


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _ratios(text: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid ratio list {text!r}") from None
    if not values or any(not 0 < v <= 1 for v in values):
        raise argparse.ArgumentTypeError("ratios must lie in (0, 1]")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rectpoint", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="generate a synthetic trial log")
    p.add_argument("--design", choices=sorted(DESIGNS), required=True)
    p.add_argument("--workers", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--ground-truth", help="ground-truth JSON (default: published models of the design)")
    p.add_argument("--outlier-rate", type=float, help="override the MT outlier injection rate")
    p.add_argument("--out", required=True)

    p = sub.add_parser("screen", help="remove spatial and movement-time outliers")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", required=True)

    p = sub.add_parser("aggregate", help="per-condition endpoint statistics")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fit", help="fit a sigma model to a condition table")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--form", choices=["1var", "3var"], required=True)
    p.add_argument("--axis", choices=["x", "y"], required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("predict", help="print the predicted error rate in percent")
    p.add_argument("--model-x", required=True)
    p.add_argument("--model-y", required=True)
    p.add_argument("--width", type=float, required=True)
    p.add_argument("--height", type=float, required=True)
    p.add_argument("--rho", type=float, default=None)

    p = sub.add_parser("crossval", help="shuffle-split cross-validation")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--form", choices=["1var", "3var"], required=True)
    p.add_argument("--ratios", type=_ratios, default=[0.8, 0.7, 0.6])
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="observed vs predicted error rates per condition")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--model-x", required=True)
    p.add_argument("--model-y", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    return parser


def cmd_simulate(args) -> None:
    if args.workers < 1:
        raise ConfigurationError("--workers must be >= 1")
    if args.ground_truth:
        truth = io.load_ground_truth(args.ground_truth)
    else:
        mx, my = PUBLISHED[args.design]
        truth = GroundTruth(mx, my)
    if args.outlier_rate is not None:
        truth = GroundTruth(**{**truth.__dict__, "outlier_rate": args.outlier_rate})
    trials = generate_experiment(DESIGNS[args.design](), truth, args.workers, args.seed)
    io.write_trials(trials, args.out)


def cmd_screen(args) -> None:
    clean, report = screen_trials(io.read_trials(args.inp))
    io.write_trials(clean, args.out)
    io.dump_json({"format_version": io.FORMAT_VERSION, **report.to_dict()}, args.report)


def cmd_aggregate(args) -> None:
    io.write_conditions(aggregate_conditions(io.read_trials(args.inp)), args.out)


def cmd_fit(args) -> None:
    report = fit_sigma_model(io.read_conditions(args.inp), form=args.form, axis=args.axis)
    io.dump_json(report.to_dict(), args.out)


def cmd_predict(args) -> None:
    mx, my = io.load_model(args.model_x), io.load_model(args.model_y)
    if mx.axis.value != "x" or my.axis.value != "y":
        raise ConfigurationError("--model-x must be an x-axis model and --model-y a y-axis model")
    geometry = TargetGeometry(args.width, args.height)
    sx = float(mx.predict(geometry.width, geometry.height)[0])
    sy = float(my.predict(geometry.width, geometry.height)[0])
    if args.rho is None:
        er = error_rate_2d(geometry, sx, sy)
    else:
        er = error_rate_bivariate(geometry, EndpointDistribution(sx, sy, args.rho))
    print(f"{100.0 * er:.2f}")


def cmd_crossval(args) -> None:
    if args.iterations < 1:
        raise ConfigurationError("--iterations must be >= 1")
    conditions = io.read_conditions(args.inp)
    reports = []
    for ratio in args.ratios:
        iterations = 1 if ratio == 1 else args.iterations
        reports.append(shuffle_split_cv(conditions, args.form, ratio, iterations, args.seed).to_dict())
    io.dump_json({"format_version": io.FORMAT_VERSION, "reports": reports}, args.out)


def cmd_report(args) -> None:
    conditions = io.read_conditions(args.inp)
    mx, my = io.load_model(args.model_x), io.load_model(args.model_y)
    predicted = predict_er_table(mx, my, conditions)
    observed = [c.error_rate_pct for c in conditions]
    metrics = prediction_metrics(observed, predicted)
    table = pd.DataFrame({
        "width_px": [c.width for c in conditions],
        "height_px": [c.height for c in conditions],
        "observed_er_pct": observed,
        "predicted_er_pct": predicted,
    })
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(io.VERSION_LINE)
        for key in ("r2", "mae_pct", "rmse_pct"):
            fh.write(f"# {key}: {metrics[key]!r}\n")
        table.to_csv(fh, index=False, lineterminator="\n")
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(io.scatter_svg(observed, predicted))
    print(f"R2={metrics['r2']:.4f} MAE={metrics['mae_pct']:.4f}% RMSE={metrics['rmse_pct']:.4f}%")


COMMANDS = {
    "simulate": cmd_simulate,
    "screen": cmd_screen,
    "aggregate": cmd_aggregate,
    "fit": cmd_fit,
    "predict": cmd_predict,
    "crossval": cmd_crossval,
    "report": cmd_report,
}


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except RectPointError as exc:
        print(f"rectpoint {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"rectpoint {args.command}: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())
