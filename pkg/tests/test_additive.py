import json
from dataclasses import replace

import numpy as np
import pytest

from aircast.additive import (
    AdditiveConfig,
    additive_components,
    fit_additive,
    fourier_basis,
    hyperparameter_grid,
    load_grid,
    place_changepoints,
    predict_additive,
    trend_at,
)
from aircast.errors import ConfigError, FeatureMismatchError

from conftest import daily

START = "2014-01-01"
FLAT = dict(n_changepoints=0, yearly_order=0, weekly_order=0)


def _t(n):
    return np.arange(n, dtype=float)


def r_squared(actual, predicted):
    return 1 - np.sum((actual - predicted) ** 2) / np.sum((actual - actual.mean()) ** 2)


# -- changepoints and bases ----------------------------------------------------------

def test_changepoints_at_quantiles():
    dates = np.datetime64(START) + np.arange(100)
    cps = place_changepoints(dates, 3, 1.0)
    assert [int((c - dates[0]).astype(int)) for c in cps] == [25, 50, 75]


def test_no_changepoints():
    assert len(place_changepoints(np.datetime64(START) + np.arange(10), 0)) == 0


def test_changepoints_stay_in_history_window():
    dates = np.datetime64(START) + np.arange(1095)
    cps = place_changepoints(dates, 25, 0.8)
    assert len(cps) == 25
    assert np.all(cps <= dates[875])
    assert np.all(np.diff(cps).astype(int) > 0)


def test_too_many_changepoints():
    with pytest.raises(ConfigError):
        place_changepoints(np.datetime64(START) + np.arange(20), 16, 0.8)


def test_fourier_rows():
    assert fourier_basis(np.array([0.0]), 365.25, 1)[0].tolist() == [0.0, 1.0]
    row = fourier_basis(np.array([365.25 / 2]), 365.25, 1)[0]
    assert row == pytest.approx([0.0, -1.0], abs=1e-12)


def test_fourier_columns_are_nearly_orthogonal():
    B = fourier_basis(_t(730), 365.25, 4)
    gram = B.T @ B
    diag = np.sqrt(np.diag(gram))
    corr = gram / np.outer(diag, diag)
    assert np.max(np.abs(corr - np.eye(8))) < 0.02


def test_fourier_order_zero_is_rejected():
    with pytest.raises(ConfigError):
        fourier_basis(_t(5), 7.0, 0)


# -- fitting --------------------------------------------------------------------------

def test_noiseless_line_is_recovered():
    fit = fit_additive(daily(2 * _t(200) + 1, start=START), AdditiveConfig(**FLAT))
    assert fit.base_slope == pytest.approx(2.0, abs=1e-6)
    assert fit.base_offset == pytest.approx(1.0, abs=1e-6)


def _seasonal_series(n=3 * 365, noise=1.0, seed=0):
    t = _t(n)
    dates = np.datetime64(START) + np.arange(n)
    season = 10 * np.sin(2 * np.pi * dates.astype(np.int64) / 365.25)
    y = 50 + 0.02 * t + season + np.random.default_rng(seed).normal(scale=noise, size=n)
    return daily(y, start=START)


def test_line_plus_yearly_cycle_holds_out_well():
    data = _seasonal_series()
    train, test = data.slice(0, len(data) - 365), data.slice(len(data) - 365, len(data))
    fit = fit_additive(train, AdditiveConfig(n_changepoints=5, weekly_order=0))
    pred = predict_additive(fit, test.dates).point
    assert r_squared(test.target, pred) > 0.95


def test_regressor_weight_is_recovered():
    rng = np.random.default_rng(1)
    x = rng.normal(size=400)
    data = daily(5 + 3.0 * x + rng.normal(scale=0.5, size=400), x, start=START)
    fit = fit_additive(data, AdditiveConfig(**FLAT))
    assert 2.9 <= fit.regressor_coefficients[0] <= 3.1


def test_zero_penalty_interpolates_model_generated_data():
    n = 300
    dates = np.datetime64(START) + np.arange(n)
    cfg = AdditiveConfig(n_changepoints=4, trend_flexibility=np.inf, seasonality_strength=np.inf,
                         yearly_order=2, weekly_order=1)
    cps = (place_changepoints(dates, 4, 0.8) - dates[0]).astype(float)
    t = _t(n)
    y = 20 + 0.1 * t + np.maximum(0, t[:, None] - cps) @ [0.2, -0.3, 0.1, 0.05]
    y = y + fourier_basis(dates.astype(np.int64), 365.25, 2) @ [3, -1, 0.5, 2]
    y = y + fourier_basis(dates.astype(np.int64), 7.0, 1) @ [1.5, -0.7]
    fit = fit_additive(daily(y, start=START), cfg)
    assert np.max(np.abs(predict_additive(fit, dates).point - y)) < 1e-8


def test_trend_is_continuous_at_changepoints():
    fit = fit_additive(_seasonal_series(noise=3.0), AdditiveConfig(n_changepoints=10))
    day = np.timedelta64(1, "D")
    for cp in fit.changepoint_times:
        left, mid, right = trend_at(fit, [cp - day, cp, cp + day])
        # the kink sits exactly at the changepoint: both sides meet at g(cp)
        slope_left, slope_right = mid - left, right - mid
        assert slope_right - slope_left == pytest.approx(
            fit.changepoint_deltas[list(fit.changepoint_times).index(cp)], abs=1e-9)


def test_components_recompose_the_forecast():
    rng = np.random.default_rng(2)
    data = _seasonal_series(n=500)
    x = rng.normal(size=(500, 2))
    data = daily(data.target + x @ [1.0, -2.0], x, start=START)
    fit = fit_additive(data, AdditiveConfig(n_changepoints=5))
    parts = additive_components(fit, data.dates, x)
    point = predict_additive(fit, data.dates, x).point
    assert np.max(np.abs(sum(parts.values()) - point)) < 1e-10
    assert set(parts) == {"trend", "seasonal", "holidays", "regressors"}


def test_multiplicative_mode_scales_season_with_trend():
    n = 3 * 365
    dates = np.datetime64(START) + np.arange(n)
    trend = 20 + 0.05 * _t(n)
    y = trend * (1 + 0.3 * np.sin(2 * np.pi * dates.astype(np.int64) / 365.25))
    data = daily(y, start=START)
    mult = fit_additive(data, AdditiveConfig(n_changepoints=0, weekly_order=0, seasonality_mode="multiplicative"))
    add = fit_additive(data, AdditiveConfig(n_changepoints=0, weekly_order=0))
    assert mult.residual_std < add.residual_std


def test_holiday_effect_is_estimated():
    n = 400
    dates = np.datetime64(START) + np.arange(n)
    special = dates[::50]
    y = 10 + np.isin(dates, special) * 8.0 + np.random.default_rng(4).normal(scale=0.1, size=n)
    fit = fit_additive(daily(y, start=START), AdditiveConfig(**FLAT, seasonality_strength=1e6),
                       holidays={"festival": special})
    assert fit.holiday_effects[0] == pytest.approx(8.0, abs=0.2)


def test_smaller_flexibility_never_grows_deltas():
    data = _seasonal_series(noise=3.0, seed=5)
    norms = [np.linalg.norm(fit_additive(data, AdditiveConfig(n_changepoints=25, trend_flexibility=f))
                            .changepoint_deltas)
             for f in sorted({c.trend_flexibility for c in hyperparameter_grid()}, reverse=True)]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(norms, norms[1:]))


# -- prediction -----------------------------------------------------------------------

def test_interval_half_width():
    fit = fit_additive(daily(np.zeros(50), start=START), AdditiveConfig(**FLAT))
    res = predict_additive(replace(fit, residual_std=10.0), [np.datetime64("2014-03-01")])
    assert res.upper[0] - res.point[0] == pytest.approx(19.59964, abs=1e-5)
    assert np.all(res.lower <= res.point) and np.all(res.point <= res.upper)


def test_constant_zero_regressor_has_no_effect():
    rng = np.random.default_rng(6)
    x = np.column_stack([rng.normal(size=200), np.zeros(200)])
    fit = fit_additive(daily(1 + 2 * x[:, 0], x, start=START), AdditiveConfig(**FLAT))
    assert fit.regressor_coefficients[1] == 0.0
    future = np.datetime64("2014-08-01") + np.arange(3)
    a = predict_additive(fit, future, np.column_stack([np.ones(3), np.zeros(3)])).point
    b = predict_additive(fit, future, np.column_stack([np.ones(3), np.full(3, 99.0)])).point
    assert np.array_equal(a, b)


def test_regressor_shape_mismatch():
    x = np.random.default_rng(0).normal(size=(100, 2))
    fit = fit_additive(daily(x.sum(axis=1), x, start=START), AdditiveConfig(**FLAT))
    with pytest.raises(FeatureMismatchError):
        predict_additive(fit, np.datetime64("2015-01-01") + np.arange(3), np.zeros((3, 1)))
    with pytest.raises(FeatureMismatchError):
        predict_additive(fit, np.datetime64("2015-01-01") + np.arange(3))


def test_interval_coverage_over_replications():
    hits = total = 0
    for seed in range(50):
        data = _seasonal_series(n=2 * 365, noise=4.0, seed=100 + seed)
        train, test = data.slice(0, len(data) - 60), data.slice(len(data) - 60, len(data))
        fit = fit_additive(train, AdditiveConfig(n_changepoints=5, weekly_order=0))
        res = predict_additive(fit, test.dates)
        hits += int(np.sum((test.target >= res.lower) & (test.target <= res.upper)))
        total += len(test)
    assert hits / total >= 0.90


# -- grid -----------------------------------------------------------------------------

def test_default_grid():
    grid = hyperparameter_grid()
    assert len(grid) == 144
    assert all(c.interval_width == 0.95 for c in grid)
    assert len({c.label for c in grid}) == 144


def test_grid_override_and_file(tmp_path):
    assert len(hyperparameter_grid([{"n_changepoints": 3}])) == 1
    path = tmp_path / "grid.json"
    path.write_text(json.dumps([{"trend_flexibility": 0.2}, {"weekly_order": 0}]))
    assert [c.trend_flexibility for c in load_grid(path)] == [0.2, AdditiveConfig().trend_flexibility]
    with pytest.raises(ConfigError):
        hyperparameter_grid([{"bogus": 1}])


@pytest.mark.parametrize("kwargs", [
    {"n_changepoints": -1}, {"changepoint_range": 0.0}, {"trend_flexibility": 0.0},
    {"seasonality_mode": "exotic"}, {"interval_width": 1.0},
])
def test_invalid_configs(kwargs):
    with pytest.raises(ConfigError):
        AdditiveConfig(**kwargs)
