import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rectpoint.core import (
    EndpointDistribution,
    SigmaModel,
    TargetGeometry,
    erf,
    error_rate_1d,
    error_rate_2d,
    error_rate_bivariate,
    predict_sigma,
)
from rectpoint.errors import DomainError, InvalidSigmaError
from rectpoint.reference import EXP1_SIGMA_X, EXP1_SIGMA_Y, EXP2_SIGMA_X, EXP2_SIGMA_Y

# 1 - erf(1), from a 40-digit mpmath evaluation
ERFC_ONE = 0.1572992070502851306587793649173907407039


def test_erf_basics():
    assert erf(0) == 0
    for x in (0.1, 1, 3):
        assert erf(-x) == -erf(x)
    assert abs(erf(1) - 0.842700792949715) < 1e-12
    assert erf(6) > 1 - 1e-12


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_erf_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        erf(bad)
    with pytest.raises(DomainError):
        erf(np.array([0.0, bad]))


def test_erf_array_matches_scalar():
    xs = np.linspace(-6, 6, 101)
    np.testing.assert_allclose(erf(xs), [erf(float(x)) for x in xs], atol=1e-15)


def test_predict_sigma_published_values():
    assert predict_sigma(EXP1_SIGMA_X, TargetGeometry(30, 30)) == pytest.approx(6.8390, abs=1e-4)
    assert predict_sigma(EXP2_SIGMA_Y, TargetGeometry(12, 12)) == pytest.approx(2.9952, abs=1e-4)
    proportional = SigmaModel("x", "1var", 0.0, 0.17)
    assert predict_sigma(proportional, TargetGeometry(100, 40)) == pytest.approx(17.0)


def test_predict_sigma_uses_axis_roles():
    mx = SigmaModel("x", "3var", 1.0, 2.0, 3.0, 4.0)
    my = SigmaModel("y", "3var", 1.0, 2.0, 3.0, 4.0)
    g = TargetGeometry(10, 5)
    assert predict_sigma(mx, g) == 1 + 2 * 10 + 3 * 5 + 4 * 2
    assert predict_sigma(my, g) == 1 + 2 * 5 + 3 * 10 + 4 * 0.5


def test_negative_sigma_is_an_error():
    tiny_h = SigmaModel("y", "3var", -1.037, 0.1508, 0.02911, 1.398)
    assert predict_sigma(tiny_h, TargetGeometry(30, 30)) > 0
    with pytest.raises(InvalidSigmaError):
        SigmaModel("x", "1var", -5.0, 0.1).predict(10, 10)


def test_model_coefficient_count_enforced():
    with pytest.raises(DomainError):
        SigmaModel("x", "1var", 1.0, 2.0, 3.0, None)
    with pytest.raises(DomainError):
        SigmaModel("x", "3var", 1.0, 2.0)
    with pytest.raises(DomainError):
        SigmaModel.from_coefficients("x", "3var", [1, 2, 3])


def test_three_var_rejects_zero_size():
    with pytest.raises(DomainError):
        EXP2_SIGMA_X.predict(12.0, 0.0)
    with pytest.raises(DomainError):
        TargetGeometry(0, 10)


def test_error_rate_1d_examples():
    assert error_rate_1d(0, 5.0) == 1.0
    assert error_rate_1d(2 * math.sqrt(2) * 3.0, 3.0) == pytest.approx(ERFC_ONE, abs=1e-10)
    assert error_rate_1d(100, 1e-6) < 1e-12
    with pytest.raises(DomainError):
        error_rate_1d(10, 0.0)
    with pytest.raises(DomainError):
        error_rate_1d(10, -1.0)


def test_error_rate_2d_published_condition():
    g = TargetGeometry(12, 12)
    er = error_rate_2d(g, predict_sigma(EXP2_SIGMA_X, g), predict_sigma(EXP2_SIGMA_Y, g))
    # 40-digit mpmath evaluation of the same product formula
    assert er == pytest.approx(0.10923744772191935, abs=1e-12)
    assert er == pytest.approx(0.1096, abs=0.002)


def test_error_rate_2d_symmetry_and_saturation():
    assert error_rate_2d(TargetGeometry(30, 50), 4.0, 7.0) == error_rate_2d(TargetGeometry(50, 30), 7.0, 4.0)
    assert error_rate_2d(TargetGeometry(200, 400), 10.0, 20.0) < 1e-12
    with pytest.raises(DomainError):
        error_rate_2d(TargetGeometry(30, 30), 0.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(
    w=st.floats(1, 200), h=st.floats(1, 200),
    sx=st.floats(0.2, 40), sy=st.floats(0.2, 40),
)
def test_product_decomposition(w, h, sx, sy):
    g = TargetGeometry(w, h)
    er = error_rate_2d(g, sx, sy)
    identity = 1 - (1 - error_rate_1d(w, sx)) * (1 - error_rate_1d(h, sy))
    assert abs(er - identity) <= 1e-15
    assert 0 <= er < 1


# 2-D mpmath quadrature of the correlated density (dps=20)
BIVARIATE_ORACLE = [
    ((30, 30, 10, 10, 0.5), 0.230238111871156),
    ((12, 12, 3.27706, 2.99518, -0.1078), 0.108895995833233),
    ((50, 30, 8, 5, 0.25), 0.00445401456668314),
    ((78, 12, 13, 2.5, -0.5), 0.0185731914115221),
]


@pytest.mark.parametrize("args,expected", BIVARIATE_ORACLE)
def test_bivariate_against_quadrature_oracle(args, expected):
    w, h, sx, sy, rho = args
    assert error_rate_bivariate(TargetGeometry(w, h), EndpointDistribution(sx, sy, rho)) == pytest.approx(expected, abs=1e-8)


def test_bivariate_rho_zero_matches_product_on_grid():
    worst = 0.0
    for w in (8, 20, 40, 80, 150):
        for h in (8, 20, 40, 80, 150):
            for sx in (2.0, 7.0, 20.0):
                for sy in (3.0, 9.0, 25.0):
                    g = TargetGeometry(w, h)
                    diff = error_rate_bivariate(g, EndpointDistribution(sx, sy, 0.0)) - error_rate_2d(g, sx, sy)
                    worst = max(worst, abs(diff))
    assert worst < 1e-8


@pytest.mark.parametrize("rho", [0.05, 0.3, 0.8, 0.99])
def test_bivariate_sign_symmetry(rho):
    g = TargetGeometry(26, 62)
    pos = error_rate_bivariate(g, EndpointDistribution(5.0, 9.0, rho))
    neg = error_rate_bivariate(g, EndpointDistribution(5.0, 9.0, -rho))
    assert abs(pos - neg) < 1e-8


def test_bivariate_rejects_bad_rho():
    with pytest.raises(DomainError):
        EndpointDistribution(1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        EndpointDistribution(1.0, -1.0, 0.0)


def test_published_models_positive_on_their_grids():
    from tests.conftest import EXP1_GRID, EXP2_GRID

    for mx, my, grid in ((EXP1_SIGMA_X, EXP1_SIGMA_Y, EXP1_GRID), (EXP2_SIGMA_X, EXP2_SIGMA_Y, EXP2_GRID)):
        w, h = np.array(grid).T
        assert np.all(mx.predict(w, h) > 0) and np.all(my.predict(w, h) > 0)
