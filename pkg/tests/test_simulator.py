import math

import numpy as np
import pytest

from rectpoint.aggregation import aggregate_conditions, pearson_rho
from rectpoint.core import EndpointDistribution, SigmaModel, TargetGeometry, error_rate_2d
from rectpoint.errors import DomainError, InvalidSigmaError
from rectpoint.reference import EXP1_SIGMA_X, EXP1_SIGMA_Y, EXP2_SIGMA_X, EXP2_SIGMA_Y
from rectpoint.simulator import (
    ExperimentDesign,
    GroundTruth,
    exp1_design,
    exp2_design,
    generate_experiment,
    monte_carlo_er,
    sample_endpoint,
    sample_endpoints,
)


def test_design_trial_counts(designs):
    exp1, exp2 = designs
    assert len(exp1.sessions()) == 64
    assert exp1.trials_per_worker == 896
    assert exp1.amplitude == 550 and exp1.trials_per_session == 14
    assert len(exp2.sessions()) == 49
    assert exp2.trials_per_worker == 1225
    assert exp2.amplitude == 500 and exp2.trials_per_session == 25


def test_cyclic_paths_alternate(designs):
    angles, amps = designs[0].trial_paths(30.0)
    # clicks 3..16: click 3 is outbound, click 4 returns
    assert angles[:4].tolist() == [30.0, 210.0, 30.0, 210.0]
    assert np.all(amps == 550)


def test_ring_paths(designs):
    angles, amps = designs[1].trial_paths(None)
    assert len(angles) == 25
    # cross-circle chord for 13 of 25 steps on a 500 px ring
    assert np.allclose(amps, 500 * math.sin(math.pi * 13 / 25))
    # first move goes from the top target down and slightly left
    # chord from the target at 90 deg to the one at 90 - 13*14.4 = -97.2 deg points at -93.6 deg
    assert angles[0] == pytest.approx(266.4)
    assert math.cos(math.radians(angles[0])) < 0 and math.sin(math.radians(angles[0])) < 0
    assert len(np.unique(np.round(angles, 6))) == 25


def test_design_invariants():
    with pytest.raises(DomainError):
        ExperimentDesign("bad", 500, ((10, 10),), (), 5, 5)
    with pytest.raises(DomainError):
        ExperimentDesign("bad", 500, (), (), 5, 1)


def test_sample_endpoint_isotropic_moments():
    rng = np.random.default_rng(0)
    d = sample_endpoints(4.0, 9.0, 0.0, 45.0, 1.0, rng, size=10**6)
    assert d[:, 0].std(ddof=1) == pytest.approx(4.0, rel=0.005)
    assert d[:, 1].std(ddof=1) == pytest.approx(9.0, rel=0.005)
    assert abs(pearson_rho(d[:, 0], d[:, 1])) < 0.005


def test_sample_endpoint_anisotropy_along_x():
    rng = np.random.default_rng(1)
    d = sample_endpoints(4.0, 6.0, 0.0, 0.0, 2.0, rng, size=10**6)
    assert d[:, 0].std(ddof=1) == pytest.approx(8.0, rel=0.005)
    assert d[:, 1].std(ddof=1) == pytest.approx(3.0, rel=0.005)
    assert abs(pearson_rho(d[:, 0], d[:, 1])) < 0.005


def test_sample_endpoint_correlation_and_determinism():
    d = sample_endpoints(3.0, 3.0, 0.4, 0.0, 1.0, np.random.default_rng(2), size=10**5)
    assert pearson_rho(d[:, 0], d[:, 1]) == pytest.approx(0.4, abs=0.02)
    a = [sample_endpoint(2.0, 3.0, 0.0, 10.0, 1.5, np.random.default_rng(9)) for _ in range(2)]
    assert a[0] == a[1]
    with pytest.raises(DomainError):
        sample_endpoint(0.0, 1.0, 0.0, 0.0, 1.0, np.random.default_rng(0))
    with pytest.raises(DomainError):
        sample_endpoint(1.0, 1.0, 1.0, 0.0, 1.0, np.random.default_rng(0))


def test_generate_shapes_and_error_flags():
    truth = GroundTruth(EXP1_SIGMA_X, EXP1_SIGMA_Y)
    df = generate_experiment(exp1_design(), truth, 2, seed=4)
    assert len(df) == 2 * 896
    assert df.groupby("worker_id").size().tolist() == [896, 896]
    assert df.groupby(["worker_id", "session_index"]).size().eq(14).all()
    outside = (df.click_dx.abs() > df.width / 2) | (df.click_dy.abs() > df.height / 2)
    assert (outside == df.is_error).all()
    assert (df.movement_time_ms > 0).all()


def test_generate_is_deterministic():
    truth = GroundTruth(EXP2_SIGMA_X, EXP2_SIGMA_Y, outlier_rate=0.02)
    a = generate_experiment(exp2_design(), truth, 1, seed=5)
    b = generate_experiment(exp2_design(), truth, 1, seed=5)
    assert a.equals(b)
    assert not a.equals(generate_experiment(exp2_design(), truth, 1, seed=6))


def test_invalid_ground_truth_propagates():
    shrinking = SigmaModel("x", "1var", -10.0, 0.1)
    with pytest.raises(InvalidSigmaError):
        generate_experiment(exp2_design(), GroundTruth(shrinking, EXP2_SIGMA_Y), 1, seed=0)
    with pytest.raises(DomainError):
        GroundTruth(EXP2_SIGMA_X, EXP2_SIGMA_Y, anisotropy=0.5)


def test_angle_blind_recovery():
    truth = GroundTruth(EXP2_SIGMA_X, EXP2_SIGMA_Y)
    conds = aggregate_conditions(generate_experiment(exp2_design(), truth, 80, seed=8))
    for c in conds:
        se = 1 / math.sqrt(2 * (c.n - 1))
        assert abs(c.sigma_x / EXP2_SIGMA_X.predict(c.width, c.height)[0] - 1) < 4 * se
        assert abs(c.sigma_y / EXP2_SIGMA_Y.predict(c.width, c.height)[0] - 1) < 4 * se
        assert abs(c.rho) < 4 / math.sqrt(c.n)


def test_anisotropy_gives_negative_rho_only_for_limited_angles():
    exp1 = aggregate_conditions(generate_experiment(
        exp1_design(), GroundTruth(EXP1_SIGMA_X, EXP1_SIGMA_Y, anisotropy=1.5), 60, seed=2))
    exp2 = aggregate_conditions(generate_experiment(
        exp2_design(), GroundTruth(EXP2_SIGMA_X, EXP2_SIGMA_Y, anisotropy=1.5), 60, seed=2))
    mean1 = np.mean([c.rho for c in exp1])
    mean2 = np.mean([c.rho for c in exp2])
    assert mean1 < -0.1
    assert abs(mean2) < abs(mean1) / 10


def test_observed_er_tracks_formula(exp2_conditions):
    for c in exp2_conditions:
        g = TargetGeometry(c.width, c.height)
        predicted = 100 * error_rate_2d(g, EXP2_SIGMA_X.predict(c.width, c.height)[0],
                                        EXP2_SIGMA_Y.predict(c.width, c.height)[0])
        assert abs(c.error_rate_pct - predicted) < 1.0


def test_monte_carlo_edge_cases():
    assert monte_carlo_er((30, 30), EndpointDistribution(1e-9, 1e-9), 10**6, seed=0) == 0.0
    assert monte_carlo_er((0, 30), EndpointDistribution(5.0, 5.0), 1000, seed=0) == 1.0
    with pytest.raises(DomainError):
        monte_carlo_er((30, 30), EndpointDistribution(5.0, 5.0), 0, seed=0)


def test_monte_carlo_matches_formula():
    p = error_rate_2d(TargetGeometry(30, 30), 10.0, 10.0)
    mc = monte_carlo_er(TargetGeometry(30, 30), EndpointDistribution(10.0, 10.0), 10**7, seed=21)
    assert abs(mc - p) < 0.0005
    assert abs(mc - p) < 3 * math.sqrt(p * (1 - p) / 10**7)
