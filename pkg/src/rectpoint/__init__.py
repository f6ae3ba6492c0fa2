"""Error-rate prediction for rectangular pointing targets from W and H alone."""

from .aggregation import ConditionStats, TrialRecord, aggregate_conditions, pearson_rho
from .core import (
    Axis,
    EndpointDistribution,
    Form,
    SigmaModel,
    TargetGeometry,
    erf,
    error_rate_1d,
    error_rate_2d,
    error_rate_bivariate,
    predict_sigma,
)
from .evaluation import CvReport, ErrorRateModel, predict_er_table, prediction_metrics, shuffle_split_cv
from .fitting import FitReport, SigmaRegressor, aic, fit_sigma_model, ols_fit, select_model
from .screening import OutlierScreener, ScreeningReport, flag_spatial_outliers, iqr_bounds, screen_trials
from .simulator import (
    ExperimentDesign,
    GroundTruth,
    exp1_design,
    exp2_design,
    generate_experiment,
    monte_carlo_er,
    sample_endpoint,
)

__version__ = "0.1.0"
