import math
import warnings

import numpy as np
import pytest

from aircast.arima import (
    ArimaSpec,
    auto_arima,
    css_negative_loglik,
    fit_arima,
    forecast_arima,
    pack_params,
)
from aircast.errors import ExhaustedSearchError, FeatureMismatchError, SeriesLengthError


def simulate(n, ar=(), ma=(), c=0.0, seed=0, burn=200):
    rng = np.random.default_rng(seed)
    e = rng.normal(size=n + burn)
    y = np.zeros(n + burn)
    for t in range(n + burn):
        y[t] = c + e[t]
        y[t] += sum(a * y[t - i - 1] for i, a in enumerate(ar) if t - i - 1 >= 0)
        y[t] += sum(b * e[t - j - 1] for j, b in enumerate(ma) if t - j - 1 >= 0)
    return y[burn:]


@pytest.fixture(scope="module")
def ar1():
    return simulate(2000, ar=(0.7,), c=3.0, seed=11)


# -- objective -----------------------------------------------------------------------

def test_intercept_only_objective_uses_population_variance():
    y = np.random.default_rng(0).normal(5, 2, size=300)
    spec = ArimaSpec(0, 0, 0)
    nll = css_negative_loglik(np.array([y.mean()]), y, None, spec)
    s2 = y.var()
    assert nll == pytest.approx(0.5 * len(y) * (math.log(2 * math.pi * s2) + 1), rel=1e-12)


def test_zero_ar_coefficient_matches_nested_objective(ar1):
    a = css_negative_loglik(np.array([1.0, 0.0]), ar1, None, ArimaSpec(1, 0, 0))
    b = css_negative_loglik(np.array([1.0]), ar1[1:], None, ArimaSpec(0, 0, 0))
    assert a == pytest.approx(b, rel=1e-12)


def test_true_parameter_beats_zero(ar1):
    spec = ArimaSpec(1, 0, 0)
    assert css_negative_loglik(np.array([3.0, 0.7]), ar1, None, spec) < \
        css_negative_loglik(np.array([3.0, 0.0]), ar1, None, spec)


def test_explosive_parameters_give_infinity():
    y = simulate(200, ma=(0.3,), seed=2)
    assert css_negative_loglik(np.array([0.0, 50.0]), y * 1e200, None, ArimaSpec(0, 0, 1)) == math.inf


def test_objective_invariant_to_exog_column_order():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(200, 3))
    y = X @ [1.0, -2.0, 0.5] + simulate(200, ar=(0.4,), seed=4)
    spec = ArimaSpec(1, 0, 1)
    params = pack_params(spec, 0.2, np.array([0.4]), np.array([0.1]), np.array([1.0, -2.0, 0.5]))
    perm = [2, 0, 1]
    params_perm = pack_params(spec, 0.2, np.array([0.4]), np.array([0.1]), np.array([0.5, 1.0, -2.0]))
    assert css_negative_loglik(params, y, X, spec) == pytest.approx(
        css_negative_loglik(params_perm, y, X[:, perm], spec), rel=1e-12)


# -- estimation ----------------------------------------------------------------------

def test_ar1_recovery(ar1):
    fit = fit_arima(ar1, spec=ArimaSpec(1, 0, 0))
    assert abs(fit.ar_coefficients[0] - 0.7) <= 0.05
    assert len(fit.residuals) == len(ar1) - 1


def test_ma1_recovery():
    y = simulate(2000, ma=(0.5,), seed=12)
    fit = fit_arima(y, spec=ArimaSpec(0, 0, 1))
    assert abs(fit.ma_coefficients[0] - 0.5) <= 0.07


def test_white_noise_intercept_is_sample_mean():
    y = np.random.default_rng(3).normal(10, 1, size=500)
    fit = fit_arima(y, spec=ArimaSpec(0, 0, 0))
    assert fit.intercept == pytest.approx(y.mean(), abs=1e-6)


def test_aic_identity_and_residual_length():
    y = simulate(600, ar=(0.5, -0.2), ma=(0.3,), seed=5)
    X = np.random.default_rng(5).normal(size=(600, 2))
    fit = fit_arima(y + X @ [0.5, 1.0], X, ArimaSpec(2, 0, 1))
    k = 2 + 1 + 2 + 1 + 1
    assert fit.aic == pytest.approx(2 * k - 2 * fit.log_likelihood, rel=1e-12)
    assert len(fit.residuals) == 600 - 2
    assert fit.exog_coefficients == pytest.approx([0.5, 1.0], abs=0.1)


def test_nested_likelihood_does_not_decrease():
    y = simulate(800, ar=(0.6,), ma=(0.4,), seed=6)
    small = fit_arima(y, spec=ArimaSpec(1, 0, 0))
    large = fit_arima(y, spec=ArimaSpec(1, 0, 1))
    assert large.log_likelihood >= small.log_likelihood - 1e-6


def test_too_short_series():
    with pytest.raises(SeriesLengthError):
        fit_arima(np.arange(30.0), spec=ArimaSpec(1, 0, 1))


def test_negative_order_is_rejected():
    with pytest.raises(ValueError):
        ArimaSpec(-1, 0, 0)


# -- forecasting -----------------------------------------------------------------------

def test_ar1_closed_form_forecast(ar1):
    fit = fit_arima(ar1, spec=ArimaSpec(1, 0, 0))
    a, phi, yT = fit.intercept, fit.ar_coefficients[0], ar1[-1]
    h = np.arange(1, 31)
    expected = a * (1 - phi ** h) / (1 - phi) + phi ** h * yT
    assert np.max(np.abs(forecast_arima(fit, 30).point - expected)) < 1e-8


def test_intercept_only_forecast_is_flat():
    y = np.random.default_rng(1).normal(size=100)
    fit = fit_arima(y, spec=ArimaSpec(0, 0, 0))
    assert np.allclose(forecast_arima(fit, 7).point, fit.intercept, atol=0)


def test_first_step_is_in_sample_predictor():
    y = simulate(500, ar=(0.5, 0.2), seed=8)
    fit = fit_arima(y, spec=ArimaSpec(2, 0, 0))
    one = fit.intercept + fit.ar_coefficients @ [y[-1], y[-2]]
    assert forecast_arima(fit, 1).point[0] == pytest.approx(one, abs=1e-10)


def test_zero_exog_coefficients_ignore_future_exog():
    from dataclasses import replace

    rng = np.random.default_rng(9)
    X = rng.normal(size=(300, 2))
    fit = fit_arima(simulate(300, ar=(0.5,), seed=9), X, ArimaSpec(1, 0, 0))
    fit = replace(fit, exog_coefficients=np.zeros(2))
    a = forecast_arima(fit, 5, rng.normal(size=(5, 2))).point
    b = forecast_arima(fit, 5, rng.normal(size=(5, 2)) * 100).point
    assert np.array_equal(a, b)


def test_forecast_exog_column_mismatch():
    X = np.random.default_rng(0).normal(size=(300, 2))
    fit = fit_arima(simulate(300, seed=0), X, ArimaSpec(0, 0, 0))
    with pytest.raises(FeatureMismatchError):
        forecast_arima(fit, 3, np.zeros((3, 3)))


def test_integrated_forecast_undifferences():
    w = simulate(400, ar=(0.6,), c=0.5, seed=10)
    y = 100 + np.cumsum(w)
    level = fit_arima(y, spec=ArimaSpec(1, 1, 0))
    diff = fit_arima(np.diff(y), spec=ArimaSpec(1, 0, 0))
    expected = y[-1] + np.cumsum(forecast_arima(diff, 12).point)
    assert np.allclose(forecast_arima(level, 12).point, expected, atol=1e-9)


# -- order search --------------------------------------------------------------------

def test_auto_arima_is_the_grid_minimum():
    y = simulate(500, ar=(0.5, 0.3), c=1.0, seed=13)
    best = auto_arima(y, p_max=3, q_max=2)
    assert len(best.search) == 12
    aics = [c.aic for c in best.search if c.aic is not None]
    assert best.aic == min(aics)
    assert best.spec.d == 0


def test_white_noise_prefers_small_model():
    # some white-noise draws carry real sample autocorrelation that exact
    # likelihood also rewards; seed 0 is not one of them
    y = np.random.default_rng(0).normal(size=400)
    best = auto_arima(y, p_max=2, q_max=2)
    zero = next(c for c in best.search if (c.p, c.q) == (0, 0))
    assert best.spec.order[::2] == (0, 0) or best.aic >= zero.aic - 2


def test_auto_arima_threads_match_serial():
    y = simulate(300, ar=(0.4,), seed=14)
    a = auto_arima(y, p_max=2, q_max=1)
    b = auto_arima(y, p_max=2, q_max=1, workers=3)
    assert a.spec == b.spec and a.aic == b.aic and a.search == b.search


def test_every_cell_failing_is_exhausted():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(ExhaustedSearchError):
            auto_arima(np.arange(8.0), p_max=1, q_max=1)


def test_negative_grid_bound():
    with pytest.raises(ValueError):
        auto_arima(np.zeros(100), p_max=-1)
