import numpy as np
import pytest

from rectpoint.aggregation import ConditionStats, aggregate_conditions
from rectpoint.core import product_error_rate
from rectpoint.reference import EXP2_SIGMA_X, EXP2_SIGMA_Y
from rectpoint.screening import screen_trials
from rectpoint.simulator import GroundTruth, exp1_design, exp2_design, generate_experiment

EXP1_SIZES = (30.0, 50.0, 80.0, 120.0)
EXP2_SIZES = (12.0, 18.0, 26.0, 36.0, 48.0, 62.0, 78.0)
EXP1_GRID = [(w, h) for w in EXP1_SIZES for h in EXP1_SIZES]
EXP2_GRID = [(w, h) for w in EXP2_SIZES for h in EXP2_SIZES]


def model_conditions(grid, model_x, model_y, noise=0.0, seed=0, n=1000):
    """Condition rows whose sigmas (and ERs) follow the given models exactly, plus optional noise."""
    rng = np.random.default_rng(seed)
    w = np.array([g[0] for g in grid])
    h = np.array([g[1] for g in grid])
    sx = model_x.predict(w, h) + noise * rng.standard_normal(len(grid))
    sy = model_y.predict(w, h) + noise * rng.standard_normal(len(grid))
    er = 100 * product_error_rate(w, h, sx, sy)
    return [ConditionStats(wi, hi, n, a, b, 0.0, 0.0, 0.0, e) for wi, hi, a, b, e in zip(w, h, sx, sy, er)]


@pytest.fixture(scope="session")
def exp2_truth():
    return GroundTruth(EXP2_SIGMA_X, EXP2_SIGMA_Y, outlier_rate=0.02)


@pytest.fixture(scope="session")
def exp2_pipeline(exp2_truth):
    """exp2 design, 250 workers, 2% MT outliers, seed 7: trials, screened trials, report, conditions."""
    trials = generate_experiment(exp2_design(), exp2_truth, 250, seed=7)
    clean, report = screen_trials(trials)
    return trials, clean, report, aggregate_conditions(clean)


@pytest.fixture(scope="session")
def exp2_conditions(exp2_pipeline):
    return exp2_pipeline[3]


@pytest.fixture
def designs():
    return exp1_design(), exp2_design()
