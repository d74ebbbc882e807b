"""Per-station benchmark pipeline: load, test, split, sweep each model family, select.

Work is cut into jobs of one (station, family, variant) each, so a process
pool can spread stations and sweeps over workers; results are merged in a
fixed order, which keeps reports independent of scheduling.
"""
from __future__ import annotations

import glob
import hashlib
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..additive import fit_additive, hyperparameter_grid, predict_additive
from ..arima import auto_arima, forecast_arima
from ..dataset import (
    TARGET,
    DailyDataset,
    SplitBundle,
    apply_minmax,
    chronological_split,
    fit_minmax,
    load_station,
)
from ..errors import AircastError, ConfigError, SelectionError
from ..forecast import ForecastResult
from ..metrics import MetricRow, evaluate, rmse
from ..neural.network import NetworkSpec, predict_network, train_sweep
from ..stationarity import adf_test

log = logging.getLogger(__name__)

STATIONS = (
    "Aotizhongxin", "Changping", "Dingling", "Dongsi", "Guanyuan", "Gucheng",
    "Huairou", "Nongzhanguan", "Shunyi", "Tiantan", "Wanliu", "Wanshouxigong",
)
FAMILIES = ("additive", "arima", "lstm", "cnn")
DATA_DIR_ENV = "AIRCAST_DATA_DIR"

# family -> (policy id, criterion recorded on each row)
POLICIES = {
    "additive": ("min_validation_rmse", "validation_rmse"),
    "arima": ("min_aic", "aic"),
    "lstm": ("min_validation_mae", "validation_mae"),
    "cnn": ("min_validation_mae", "validation_mae"),
}


@dataclass(frozen=True)
class RunConfig:
    data_dir: str
    output_dir: str = "aircast-report"
    stations: tuple = STATIONS
    models: tuple = FAMILIES
    train_fraction: float = 0.75
    validation_fraction: float = 0.20
    epochs_sweep: tuple = (200, 400, 600, 800, 1000)
    activations: tuple = ("tanh", "relu")
    seed: int = 0
    workers: int = 1
    file_pattern: str = "PRSA_Data_{station}_*.csv"
    p_max: int = 5
    q_max: int = 5
    adf_regression: str = "ct"
    mape_policy: str = "error"
    # NetworkSpec fields applied to both architectures (units, batch_size, ...)
    network: dict = field(default_factory=dict)
    # None means the default 144-cell grid
    additive_grid: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "stations", tuple(self.stations))
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "epochs_sweep", tuple(int(e) for e in self.epochs_sweep))
        object.__setattr__(self, "activations", tuple(self.activations))
        if not self.stations:
            raise ConfigError("at least one station is required")
        bad = set(self.models) - set(FAMILIES)
        if bad or not self.models:
            raise ConfigError(f"models must be a non-empty subset of {FAMILIES}, got {self.models}")
        if not self.epochs_sweep or min(self.epochs_sweep) < 1:
            raise ConfigError("epochs_sweep must be a non-empty list of positive counts")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must be in (0, 1)")
        if not 0 < self.validation_fraction < 1:
            raise ConfigError("validation_fraction must be in (0, 1)")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        reserved = {"kind", "lstm_activation", "epochs", "seed"}
        if reserved & set(self.network):
            raise ConfigError(f"network overrides may not set {sorted(reserved & set(self.network))}")

    def to_dict(self):
        d = asdict(self)
        d["additive_grid"] = None if self.additive_grid is None else list(self.additive_grid)
        return d


@dataclass(frozen=True)
class SweepRow:
    station: str
    family: str
    index: int  # position in the family's sweep
    label: str
    criterion_name: str
    criterion: float | None
    metrics: MetricRow | None
    status: str = "ok"
    selected: bool = False
    variant: str = ""  # LSTM activation; empty elsewhere


@dataclass
class FamilyResult:
    family: str
    variant: str
    rows: list
    forecasts: dict  # row index -> ForecastResult (rows with metrics only)
    digest: str  # checksum of everything handed to fit / scaler routines
    seconds: float
    extra: dict = field(default_factory=dict)


@dataclass
class StationInput:
    station: str
    path: str
    data: DailyDataset
    split: SplitBundle
    adf: dict
    projection_digest: str


@dataclass
class StationReport:
    station: str
    path: str
    n_days: int
    test_dates: np.ndarray
    test_actual: np.ndarray
    adf: dict
    rows: list  # every sweep row, families in FAMILIES order
    selected: dict  # family -> ForecastResult of the selected row
    digests: dict
    seconds: dict
    extra: dict


# ---------------------------------------------------------------------------
# input preparation


def resolve_data_dir(flag: str | None) -> str:
    """Explicit flag first, then the environment variable."""
    if flag:
        return flag
    env = os.environ.get(DATA_DIR_ENV)
    if env:
        return env
    raise ConfigError(f"no data directory given and {DATA_DIR_ENV} is not set")


def station_file(data_dir, station: str, pattern: str) -> str:
    matches = sorted(glob.glob(os.path.join(str(data_dir), pattern.format(station=station))))
    if not matches:
        raise FileNotFoundError(
            f"no file matching {pattern.format(station=station)!r} in {data_dir}"
        )
    return matches[0]


def _digest(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a)
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def _dataset_digest(*parts: DailyDataset) -> str:
    arrays = []
    for p in parts:
        arrays += [p.dates.astype(np.int64), p.target, p.features]
    return _digest(*arrays)


def prepare_station(station: str, config: RunConfig) -> StationInput:
    path = station_file(config.data_dir, station, config.file_pattern)
    try:
        data = load_station(path)
        adf = adf_test(data.target, regression=config.adf_regression)
        log.info("%s: ADF statistic %.3f, p=%.4f, lag %d, unit root rejected: %s",
                 station, adf.statistic, adf.p_value, adf.lag_order, adf.reject_unit_root_at_5pct)
        split = chronological_split(data, config.train_fraction, config.validation_fraction)
    except (AircastError, ValueError) as exc:
        log.error("station %s (%s): %s", station, path, exc)
        raise
    # independent test-free projection: the first floor(n * train_fraction) days
    n_block = int(np.floor(len(data) * config.train_fraction))
    n_val = int(np.floor(n_block * config.validation_fraction))
    projection = data.slice(0, n_block)
    proj_digest = _dataset_digest(projection.slice(0, n_block - n_val),
                                  projection.slice(n_block - n_val, n_block))
    adf_summary = {
        "statistic": adf.statistic,
        "p_value": adf.p_value,
        "lag_order": adf.lag_order,
        "regression": adf.regression_kind.value,
        "reject_unit_root_at_5pct": bool(adf.reject_unit_root_at_5pct),
    }
    return StationInput(station, str(path), data, split, adf_summary, proj_digest)


# ---------------------------------------------------------------------------
# family sweeps


def _error_tag(exc: Exception) -> str:
    return f"error: {type(exc).__name__}: {exc}"


def _evaluate(actual, forecast, config):
    return evaluate(actual, forecast.point, mape_policy=config.mape_policy)


def run_additive(station: str, split: SplitBundle, config: RunConfig) -> FamilyResult:
    """Fit each config on train, score on validation, refit on train+validation for test."""
    t0 = time.perf_counter()
    grid = hyperparameter_grid(None if config.additive_grid is None else list(config.additive_grid))
    train, val, test, block = split.train, split.validation, split.test, split.block
    _, crit_name = POLICIES["additive"]
    rows, forecasts = [], {}
    for i, cfg in enumerate(grid):
        try:
            vfit = fit_additive(train, cfg)
            score = rmse(val.target, predict_additive(vfit, val.dates, val.features).point)
            fit = fit_additive(block, cfg)
            fc = predict_additive(fit, test.dates, test.features)
            rows.append(SweepRow(station, "additive", i, cfg.label or str(cfg.to_dict()),
                                 crit_name, score, _evaluate(test.target, fc, config)))
            forecasts[i] = fc
        except (AircastError, ValueError, ArithmeticError) as exc:
            log.warning("%s additive cell %d failed: %s", station, i, exc)
            rows.append(SweepRow(station, "additive", i, cfg.label, crit_name, None, None, _error_tag(exc)))
    return FamilyResult("additive", "", rows, forecasts, _dataset_digest(train, val),
                        time.perf_counter() - t0)


def run_arima(station: str, split: SplitBundle, config: RunConfig) -> FamilyResult:
    """AIC search on the train+validation block; only the winner is forecast."""
    t0 = time.perf_counter()
    block, test = split.block, split.test
    _, crit_name = POLICIES["arima"]
    try:
        fit = auto_arima(block.target, block.features, p_max=config.p_max, q_max=config.q_max, d=0)
    except AircastError as exc:
        rows = [SweepRow(station, "arima", 0, "grid", crit_name, None, None, _error_tag(exc))]
        return FamilyResult("arima", "", rows, {}, _dataset_digest(split.train, split.validation),
                            time.perf_counter() - t0)
    fc = forecast_arima(fit, len(test), test.features)
    fc = ForecastResult(point=fc.point, dates=test.dates)
    rows, forecasts = [], {}
    for i, cell in enumerate(fit.search):
        label = f"ARIMA({cell.p},0,{cell.q})"
        if cell.status != "ok":
            rows.append(SweepRow(station, "arima", i, label, crit_name, None, None, f"error: {cell.status}"))
            continue
        winner = (cell.p, cell.q) == (fit.spec.p, fit.spec.q)
        metrics = _evaluate(test.target, fc, config) if winner else None
        rows.append(SweepRow(station, "arima", i, label, crit_name, cell.aic, metrics))
        if winner:
            forecasts[i] = fc
    return FamilyResult("arima", "", rows, forecasts, _dataset_digest(split.train, split.validation),
                        time.perf_counter() - t0, extra={"order": list(fit.spec.order),
                                                         "fit": fit.summary()})


def network_spec(kind: str, activation: str, config: RunConfig) -> NetworkSpec:
    return NetworkSpec(kind=kind, lstm_activation=activation, seed=config.seed,
                       epochs=max(config.epochs_sweep), **config.network)


def _with_context(block_features, features, lookback):
    # prepend the last lookback-1 days so the first window is complete
    if lookback <= 1:
        return features
    return np.vstack([block_features[len(block_features) - lookback + 1:], features])


def run_network(station: str, split: SplitBundle, config: RunConfig, kind: str,
                activation: str = "tanh", offset: int = 0) -> FamilyResult:
    """One training run per (kind, activation), snapshotted at each epoch budget."""
    t0 = time.perf_counter()
    family = "lstm" if kind == "lstm" else "cnn"
    _, crit_name = POLICIES[family]
    train, val, test, block = split.train, split.validation, split.test, split.block
    fscale = fit_minmax(block.features, block.feature_names)
    tscale = fit_minmax(block.target, (TARGET,))
    spec = network_spec(kind, activation, config)
    # scalers are fitted on train + validation, so this covers them too
    digest = _dataset_digest(train, val)
    variant = activation if family == "lstm" else ""
    suffix = f" activation={activation}" if family == "lstm" else ""
    rows, forecasts = [], {}
    try:
        fits = train_sweep(
            spec,
            apply_minmax(fscale, train.features),
            apply_minmax(tscale, train.target),
            config.epochs_sweep,
            validation=(apply_minmax(fscale, val.features), apply_minmax(tscale, val.target)),
            target_scaler=tscale,
            feature_scaler=fscale,
        )
    except (AircastError, FloatingPointError) as exc:
        log.warning("%s %s%s failed: %s", station, family, suffix, exc)
        for j, e in enumerate(config.epochs_sweep):
            rows.append(SweepRow(station, family, offset + j, f"epochs={e}{suffix}", crit_name,
                                 None, None, _error_tag(exc), variant=variant))
        return FamilyResult(family, variant, rows, {}, digest, time.perf_counter() - t0)
    test_x = apply_minmax(fscale, _with_context(block.features, test.features, spec.lookback))
    clip_events = {}
    for j, (e, fit) in enumerate(zip(config.epochs_sweep, fits)):
        fc = ForecastResult(point=predict_network(fit, test_x, scaler=fscale), dates=test.dates)
        idx = offset + j
        rows.append(SweepRow(station, family, idx, f"epochs={e}{suffix}", crit_name,
                             fit.final_validation_loss, _evaluate(test.target, fc, config),
                             variant=variant))
        forecasts[idx] = fc
        clip_events[str(e)] = fit.clip_events
    return FamilyResult(family, variant, rows, forecasts, digest, time.perf_counter() - t0,
                        extra={"scalers": {"features": fscale.to_dict(), "target": tscale.to_dict()},
                               "clip_events": clip_events})


# ---------------------------------------------------------------------------
# selection


def select_best(rows, policy: str) -> SweepRow:
    """Lowest criterion among evaluated rows; the earliest row wins ties."""
    wanted = {p: c for p, c in POLICIES.values()}
    if policy not in wanted:
        raise ConfigError(f"unknown selection policy {policy!r}")
    pool = [
        r for r in rows
        if r.status == "ok" and r.metrics is not None and r.criterion is not None
        and math.isfinite(r.criterion)
    ]
    if not pool:
        raise SelectionError(f"no evaluated rows to select from under {policy}")
    for r in pool:
        if r.criterion_name != wanted[policy]:
            raise SelectionError(f"row criterion {r.criterion_name!r} does not match policy {policy}")
    return min(pool, key=lambda r: r.criterion)


# ---------------------------------------------------------------------------
# orchestration


def station_jobs(config: RunConfig) -> list[tuple]:
    """(family, kind/variant, row offset) in report order."""
    jobs = []
    for family in FAMILIES:
        if family not in config.models:
            continue
        if family == "lstm":
            for a, act in enumerate(config.activations):
                jobs.append((family, act, a * len(config.epochs_sweep)))
        else:
            jobs.append((family, "", 0))
    return jobs


def _materialize(split: SplitBundle) -> SplitBundle:
    # fresh arrays for every job: numpy's SIMD reductions depend on memory
    # alignment, so slices of a parent array and unpickled copies in a worker
    # process would otherwise differ in the last bits
    def fresh(d):
        return replace(d, dates=d.dates.copy(), target=d.target.copy(), features=d.features.copy())
    return SplitBundle(fresh(split.train), fresh(split.validation), fresh(split.test))


def run_job(station: str, split: SplitBundle, config: RunConfig, family: str, variant: str,
            offset: int) -> FamilyResult:
    split = _materialize(split)
    if family == "additive":
        return run_additive(station, split, config)
    if family == "arima":
        return run_arima(station, split, config)
    if family == "lstm":
        return run_network(station, split, config, "lstm", variant, offset)
    return run_network(station, split, config, "cnn1d")


def assemble_station(inp: StationInput, results: list[FamilyResult]) -> StationReport:
    rows, selected, digests, seconds, extra = [], {}, {}, {}, {}
    for family in FAMILIES:
        parts = [r for r in results if r.family == family]
        if not parts:
            continue
        family_rows = [row for r in parts for row in r.rows]
        forecasts = {k: v for r in parts for k, v in r.forecasts.items()}
        policy, _ = POLICIES[family]
        try:
            best = select_best(family_rows, policy)
            family_rows = [replace(r, selected=(r is best)) for r in family_rows]
            selected[family] = forecasts[best.index]
        except SelectionError as exc:
            log.error("%s %s: %s", inp.station, family, exc)
        rows += family_rows
        for r in parts:
            key = family + (f"/{r.variant}" if r.variant else "")
            digests[key] = r.digest
            seconds[key] = r.seconds
            if r.extra:
                extra[key] = r.extra
    return StationReport(
        station=inp.station,
        path=inp.path,
        n_days=len(inp.data),
        test_dates=inp.split.test.dates,
        test_actual=inp.split.test.target,
        adf=inp.adf,
        rows=rows,
        selected=selected,
        digests={"projection": inp.projection_digest, "fit_inputs": digests},
        seconds=seconds,
        extra=extra,
    )


def run_station(station: str, config: RunConfig) -> StationReport:
    """Full single-station pipeline, in process."""
    inp = prepare_station(station, config)
    results = [run_job(station, inp.split, config, *job) for job in station_jobs(config)]
    return assemble_station(inp, results)


def run_bench(config: RunConfig) -> list[StationReport]:
    """Every configured station; jobs are spread over ``config.workers`` processes."""
    inputs = [prepare_station(s, config) for s in config.stations]
    jobs = [(inp, job) for inp in inputs for job in station_jobs(config)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(run_job, inp.station, inp.split, config, *job) for inp, job in jobs]
            results = [f.result() for f in futures]
    else:
        results = [run_job(inp.station, inp.split, config, *job) for inp, job in jobs]
    reports = []
    for inp in inputs:
        mine = [r for (owner, _), r in zip(jobs, results) if owner is inp]
        reports.append(assemble_station(inp, mine))
    return reports

