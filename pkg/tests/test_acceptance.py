"""Release acceptance criteria, one test each.

The terminal summary prints a PASS / FAIL / SKIP line per criterion (see
``conftest.py``). Runtime budgets are asserted on the code under test, not
on the oracles.
"""
import json
import os
import time
import warnings

import numpy as np
import pytest

from aircast.additive import AdditiveConfig, fit_additive, hyperparameter_grid, predict_additive
from aircast.arima import ArimaSpec, auto_arima, fit_arima, forecast_arima
from aircast.bench import reference
from aircast.bench.report import emit_report
from aircast.bench.runner import DATA_DIR_ENV, RunConfig, run_bench, station_file
from aircast.bench.synthetic import write_synthetic_station
from aircast.metrics import evaluate
from aircast.neural.network import NetworkSpec, build_and_train
from aircast.stationarity import adf_test

from conftest import daily
from gradcheck import CHECKS, check_network
from oracles import naive_metrics
from test_arima import simulate

CSV_REPORTS = ("station_metrics.csv", "averages.csv", "activations.csv")


def _ar1(phi, n, rng):
    e = rng.normal(size=n)
    y = np.empty(n)
    y[0] = e[0]
    for t in range(1, n):
        y[t] = phi * y[t - 1] + e[t]
    return y


# -- metrics ------------------------------------------------------------------------------

@pytest.mark.acceptance("metric oracle equivalence (1000 pairs, < 5 s)")
def test_metric_oracle_equivalence():
    rng = np.random.default_rng(2024)
    pairs = []
    for _ in range(1000):
        n = int(rng.integers(10, 10_001))
        actual = rng.uniform(1.0, 500.0, size=n)
        pairs.append((actual, actual + rng.normal(scale=30.0, size=n)))
    t0 = time.perf_counter()
    ours = [evaluate(a, p) for a, p in pairs]
    elapsed = time.perf_counter() - t0
    worst = 0.0
    for (a, p), row in zip(pairs, ours):
        ref = naive_metrics(a.tolist(), p.tolist())
        got = (row.rmse, row.mae, row.mape, row.rrse)
        worst = max(worst, max(abs(g - r) / max(abs(r), 1.0) for g, r in zip(got, ref)))
    assert worst < 1e-12, f"largest relative deviation {worst:.2e}"
    assert elapsed < 5.0, f"{elapsed:.2f} s"


# -- stationarity -----------------------------------------------------------------------

@pytest.mark.acceptance("ADF calibration (100 seeds, < 30 s)")
def test_adf_calibration():
    t0 = time.perf_counter()
    walk_rejections = ar_rejections = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        walk = np.cumsum(rng.normal(size=500))
        walk_rejections += adf_test(walk).reject_unit_root_at_5pct
        ar_rejections += adf_test(_ar1(0.5, 500, rng)).reject_unit_root_at_5pct
    elapsed = time.perf_counter() - t0
    assert walk_rejections <= 10, f"random walks rejected {walk_rejections}/100"
    assert ar_rejections >= 95, f"AR(1) rejected {ar_rejections}/100"
    assert elapsed < 30.0, f"{elapsed:.2f} s"


# -- arima --------------------------------------------------------------------------------

@pytest.mark.acceptance("ARIMA recovery and exhaustive grid argmin (< 60 s)")
def test_arima_recovery():
    ar = simulate(2000, ar=(0.7,), seed=101)
    ma = simulate(2000, ma=(0.5,), seed=102)
    ar2 = simulate(600, ar=(0.5, 0.25), c=2.0, seed=103)
    t0 = time.perf_counter()
    phi = fit_arima(ar, spec=ArimaSpec(1, 0, 0)).ar_coefficients[0]
    theta = fit_arima(ma, spec=ArimaSpec(0, 0, 1)).ma_coefficients[0]
    best = auto_arima(ar2, p_max=5, q_max=5)
    elapsed = time.perf_counter() - t0
    assert abs(phi - 0.7) <= 0.05, f"phi {phi:.4f}"
    assert abs(theta - 0.5) <= 0.07, f"theta {theta:.4f}"
    # refit every cell on the common sample, independently of the search
    aics = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for p in range(6):
            for q in range(6):
                try:
                    aics[p, q] = fit_arima(ar2[5 - p:], spec=ArimaSpec(p, 0, q)).aic
                except Exception:
                    continue
    assert len(best.search) == 36
    assert best.aic <= min(aics.values()) + 1e-9
    assert aics[best.spec.p, best.spec.q] == pytest.approx(best.aic, rel=1e-12)
    assert elapsed < 60.0, f"{elapsed:.2f} s"


@pytest.mark.acceptance("AR(1) forecast closed form (h <= 30, 1e-8)")
def test_ar1_forecast_closed_form():
    y = simulate(1500, ar=(0.6,), c=4.0, seed=104)
    fit = fit_arima(y, spec=ArimaSpec(1, 0, 0))
    a, phi = fit.intercept, fit.ar_coefficients[0]
    h = np.arange(1, 31)
    expected = a * (1 - phi ** h) / (1 - phi) + phi ** h * y[-1]
    gap = float(np.max(np.abs(forecast_arima(fit, 30).point - expected)))
    assert gap < 1e-8, f"max deviation {gap:.2e}"


# -- additive -----------------------------------------------------------------------------

@pytest.mark.acceptance("additive model: line, seasonal R2, 144 grid, 95% interval covers >= 90%")
def test_additive_model():
    t = np.arange(200.0)
    flat = AdditiveConfig(n_changepoints=0, yearly_order=0, weekly_order=0)
    line = fit_additive(daily(2 * t + 1, start="2014-01-01"), flat)
    assert abs(line.base_slope - 2) < 1e-6 and abs(line.base_offset - 1) < 1e-6

    def seasonal(n, noise, seed):
        dates = np.datetime64("2014-01-01") + np.arange(n)
        y = 50 + 0.02 * np.arange(n) + 10 * np.sin(2 * np.pi * dates.astype(np.int64) / 365.25)
        return daily(y + np.random.default_rng(seed).normal(scale=noise, size=n), start="2014-01-01")

    cfg = AdditiveConfig(n_changepoints=5, weekly_order=0)
    data = seasonal(3 * 365, 1.0, 0)
    train, test = data.slice(0, 730), data.slice(730, 1095)
    pred = predict_additive(fit_additive(train, cfg), test.dates).point
    r2 = 1 - np.sum((test.target - pred) ** 2) / np.sum((test.target - test.target.mean()) ** 2)
    assert r2 > 0.95, f"R2 {r2:.4f}"

    assert len(hyperparameter_grid()) == 144

    hits = total = 0
    for seed in range(50):
        data = seasonal(730, 4.0, 500 + seed)
        train, test = data.slice(0, 670), data.slice(670, 730)
        res = predict_additive(fit_additive(train, cfg), test.dates)
        hits += int(np.sum((test.target >= res.lower) & (test.target <= res.upper)))
        total += len(test)
    assert hits / total >= 0.90, f"coverage {hits / total:.3f}"


# -- neural ---------------------------------------------------------------------------------

@pytest.mark.acceptance("neural gradient checks (5 seeds per layer, < 60 s)")
def test_gradient_checks():
    t0 = time.perf_counter()
    worst = {}
    for seed in range(5):
        for name, check in CHECKS.items():
            worst[name] = max(worst.get(name, 0.0), max(check(seed).values()))
        for kind, act in (("lstm", "tanh"), ("lstm", "relu"), ("cnn1d", "tanh")):
            key = f"net-{kind}-{act}"
            worst[key] = max(worst.get(key, 0.0), max(check_network(seed, kind, act).values()))
    elapsed = time.perf_counter() - t0
    assert max(worst.values()) < 1e-4, worst
    assert elapsed < 60.0, f"{elapsed:.2f} s"


@pytest.mark.acceptance("overfit: tiny LSTM and CNN reach MAE < 1e-2 within 2000 epochs")
def test_overfit():
    rng = np.random.default_rng(42)
    X, y = rng.uniform(size=(8, 4)), rng.uniform(0.1, 0.9, size=8)
    best = {}
    for kind in ("lstm", "cnn1d"):
        spec = NetworkSpec(kind=kind, lstm_units=16, conv_filters=16, dense_hidden=16,
                           batch_size=8, learning_rate=0.01, epochs=2000, seed=3)
        best[kind] = float(build_and_train(spec, X, y).train_loss_history.min())
    assert max(best.values()) < 1e-2, best


# -- bench ----------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def full_runs(tmp_path_factory):
    """Two default-configuration bench runs on the same synthetic station."""
    root = tmp_path_factory.mktemp("acceptance")
    write_synthetic_station(root / "data", "Synthetic", days=1461, seed=7)
    outs = []
    for k in range(2):
        out = root / f"run{k}"
        config = RunConfig(data_dir=str(root / "data"), output_dir=str(out), stations=("Synthetic",),
                           seed=0, workers=os.cpu_count() or 1)
        emit_report(run_bench(config), out, config)
        outs.append(out)
    return outs


@pytest.mark.acceptance("determinism: two full bench runs give byte-identical CSV reports")
def test_bench_determinism(full_runs):
    a, b = full_runs
    names = list(CSV_REPORTS) + sorted(str(p.relative_to(a)) for p in (a / "plots").glob("*.csv"))
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


@pytest.mark.acceptance("pipeline structure: 10 LSTM, 5 CNN, 144 additive, 36 ARIMA cells")
def test_pipeline_structure(full_runs):
    manifest = json.loads((full_runs[0] / "manifest.json").read_text())
    cells = manifest["sweep_cells"]["Synthetic"]
    assert cells == {"additive": 144, "arima": 36, "lstm": 10, "cnn": 5}, cells
    assert manifest["stations"]["Synthetic"]["leakage_check"] is True


@pytest.mark.acceptance("end-to-end on UCI data (one station, epochs {200, 400})")
def test_end_to_end_uci(tmp_path):
    data_dir = os.environ.get(DATA_DIR_ENV)
    station = "Aotizhongxin"
    if not data_dir:
        pytest.skip(f"UCI data not available: set {DATA_DIR_ENV} to the PRSA_Data_*.csv directory")
    try:
        station_file(data_dir, station, RunConfig(data_dir=data_dir).file_pattern)
    except FileNotFoundError:
        pytest.skip(f"UCI data not available: no {station} file under {data_dir}")
    config = RunConfig(data_dir=data_dir, output_dir=str(tmp_path), stations=(station,),
                       epochs_sweep=(200, 400), workers=1)
    t0 = time.perf_counter()
    report = emit_report(run_bench(config), tmp_path, config)
    elapsed = time.perf_counter() - t0
    problems = []
    for family, (mean, _) in report.averages.items():
        ref_rmse = reference.STATION_METRICS[station][family][0]
        if not 0.5 * ref_rmse <= mean.rmse <= 1.5 * ref_rmse:
            problems.append(f"{family} RMSE {mean.rmse:.1f} vs reference {ref_rmse}")
    lstm_mape = report.averages["lstm"][0].mape
    additive_mape = report.averages["additive"][0].mape
    if not lstm_mape < additive_mape:
        problems.append(f"LSTM MAPE {lstm_mape:.1f} not below additive {additive_mape:.1f}")
    assert not problems, "; ".join(problems)
    assert elapsed < 30 * 60, f"{elapsed:.0f} s"
