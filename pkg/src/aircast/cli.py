"""Command line entry point: ``aircast <subcommand>``."""
from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click
import numpy as np
import pandas as pd

from . import __version__
from .errors import AircastError

log = logging.getLogger("aircast")


def _dump(obj) -> None:
    click.echo(json.dumps(obj, indent=2, sort_keys=True, default=_json_default,
                          allow_nan=True))


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, np.datetime64):
        return str(o)
    raise TypeError(f"{type(o).__name__} is not JSON serialisable")


def _read_column(path, column):
    frame = pd.read_csv(path)
    if column is None:
        numeric = [c for c in frame.columns if pd.api.types.is_numeric_dtype(frame[c])]
        if not numeric:
            raise click.BadParameter(f"{path} has no numeric column")
        column = "PM2.5" if "PM2.5" in numeric else numeric[0]
    if column not in frame.columns:
        raise click.BadParameter(f"column {column!r} not in {path}")
    values = frame[column].to_numpy(dtype=float)
    if not np.all(np.isfinite(values)):
        raise click.BadParameter(f"column {column!r} has missing or non-finite values")
    return values


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (AircastError, FileNotFoundError) as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(2)


@click.group(cls=_Group)
@click.version_option(__version__, prog_name="aircast")
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for debug output.")
def main(verbose):
    """Daily PM2.5 forecasting engine and benchmark harness."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")


# ---------------------------------------------------------------------------


@main.command()
@click.argument("station_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_csv", required=True, type=click.Path(dir_okay=False),
              help="Daily CSV to write (date, PM2.5, features).")
@click.option("--sidecar", type=click.Path(dir_okay=False),
              help="JSON with the wind-direction codes and scaler state [default: OUT with .json].")
@click.option("--train-fraction", default=0.75, show_default=True)
def prepare(station_csv, out_csv, sidecar, train_fraction):
    """Clean one hourly station file into a daily dataset.

    The recorded scaler is fitted on the training block only.
    """
    from .dataset import chronological_split, fit_minmax, load_station, write_daily

    data = load_station(station_csv)
    sidecar = sidecar or str(Path(out_csv).with_suffix(".json"))
    block = chronological_split(data, train_fraction).train
    scaler = fit_minmax(block.features, block.feature_names)
    write_daily(data, out_csv, sidecar, scaler)
    click.echo(f"wrote {len(data)} days to {out_csv}")


@main.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--column", help="Column to test (default: PM2.5 or the first numeric column).")
@click.option("--max-lag", type=int, help="Largest lag considered (default: Schwert's rule).")
@click.option("--regression", type=click.Choice(["c", "ct"]), default="ct", show_default=True)
def adf(csv_path, column, max_lag, regression):
    """Augmented Dickey-Fuller test on one series."""
    from .stationarity import adf_test

    res = adf_test(_read_column(csv_path, column), max_lag=max_lag, regression=regression)
    _dump(res.to_dict())


@main.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--column", help="Target column (default: PM2.5 or the first numeric column).")
@click.option("--p-max", default=5, show_default=True)
@click.option("--q-max", default=5, show_default=True)
@click.option("--d", "d", default=0, show_default=True)
@click.option("--horizon", default=30, show_default=True)
@click.option("--exog/--no-exog", default=False,
              help="Use the other columns of a daily CSV as regressors; the last HORIZON rows "
                   "are then held out and forecast from their regressor values.")
@click.option("--workers", default=1, show_default=True)
def arima(csv_path, column, p_max, q_max, d, horizon, exog, workers):
    """Order search over the (p, q) grid and a multi-step forecast."""
    from .arima import auto_arima, forecast_arima
    from .metrics import evaluate

    if exog:
        from .dataset import read_daily

        data = read_daily(csv_path)
        if horizon >= len(data):
            raise click.BadParameter("horizon must be shorter than the series")
        train, test = data.slice(0, len(data) - horizon), data.slice(len(data) - horizon, len(data))
        fit = auto_arima(train.target, train.features, p_max, q_max, d, workers=workers)
        fc = forecast_arima(fit, horizon, test.features)
        out = {"fit": fit.summary(), "forecast": fc.point, "actual": test.target,
               "dates": [str(x) for x in test.dates],
               "metrics": evaluate(test.target, fc.point, mape_policy="exclude").to_dict()}
    else:
        y = _read_column(csv_path, column)
        fit = auto_arima(y, None, p_max, q_max, d, workers=workers)
        out = {"fit": fit.summary(), "forecast": forecast_arima(fit, horizon).point}
    out["search"] = [{"p": c.p, "q": c.q, "aic": c.aic, "status": c.status} for c in fit.search]
    _dump(out)


def _parse_overrides(pairs):
    out = {}
    for item in pairs:
        if "=" not in item:
            raise click.BadParameter(f"expected key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


@main.command()
@click.argument("daily_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--grid", "grid_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON list of configs to fit.")
@click.option("--default-grid", is_flag=True, help="Fit the built-in 144-config grid.")
@click.option("--config", "overrides", multiple=True, metavar="KEY=VALUE",
              help="Override a config field, for every config; repeatable.")
@click.option("--horizon", default=30, show_default=True,
              help="Number of final rows held out and forecast.")
def additive(daily_csv, grid_path, default_grid, overrides, horizon):
    """Fit the trend + seasonality model for one or more configs."""
    from .additive import AdditiveConfig, fit_additive, hyperparameter_grid, load_grid, predict_additive
    from .dataset import read_daily
    from .metrics import evaluate

    if grid_path and default_grid:
        raise click.BadParameter("--grid and --default-grid are exclusive")
    if grid_path:
        configs = load_grid(grid_path)
    elif default_grid:
        configs = hyperparameter_grid()
    else:
        configs = [AdditiveConfig()]
    extra = _parse_overrides(overrides)
    if extra:
        configs = [AdditiveConfig.from_dict({**c.to_dict(), **extra}) for c in configs]
    data = read_daily(daily_csv)
    if not 0 < horizon < len(data):
        raise click.BadParameter("horizon must be between 1 and the series length - 1")
    train, test = data.slice(0, len(data) - horizon), data.slice(len(data) - horizon, len(data))
    results = []
    for cfg in configs:
        fit = fit_additive(train, cfg)
        fc = predict_additive(fit, test.dates, test.features)
        results.append({
            "summary": fit.summary(),
            "forecast": fc.to_dict(),
            "metrics": evaluate(test.target, fc.point, mape_policy="exclude").to_dict(),
        })
    _dump({"actual": test.target, "results": results})


@main.command()
@click.argument("daily_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--kind", type=click.Choice(["lstm", "cnn"]), default="lstm", show_default=True)
@click.option("--epochs", default=200, show_default=True)
@click.option("--activation", type=click.Choice(["tanh", "relu"]), default="tanh", show_default=True)
@click.option("--lookback", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--batch", default=32, show_default=True)
@click.option("--units", default=128, show_default=True, help="LSTM units / conv filters.")
@click.option("--lr", default=0.001, show_default=True)
@click.option("--train-fraction", default=0.75, show_default=True)
@click.option("--validation-fraction", default=0.20, show_default=True)
@click.option("--save", type=click.Path(dir_okay=False), help="Write the trained model here.")
def nn(daily_csv, kind, epochs, activation, lookback, seed, batch, units, lr,
       train_fraction, validation_fraction, save):
    """Train one network on a daily CSV and score it on the held-out tail."""
    from .dataset import TARGET, apply_minmax, chronological_split, fit_minmax, read_daily
    from .metrics import evaluate
    from .neural.network import NetworkSpec, build_and_train, predict_network
    from .neural.persist import save_network

    data = read_daily(daily_csv)
    split = chronological_split(data, train_fraction, validation_fraction)
    block = split.block
    fs = fit_minmax(block.features, block.feature_names)
    ts = fit_minmax(block.target, (TARGET,))
    spec = NetworkSpec(kind="lstm" if kind == "lstm" else "cnn1d", lstm_units=units,
                       conv_filters=units, lstm_activation=activation, lookback=lookback,
                       seed=seed, batch_size=batch, epochs=epochs, learning_rate=lr)
    val = split.validation
    fit = build_and_train(
        spec, apply_minmax(fs, split.train.features), apply_minmax(ts, split.train.target),
        validation=(apply_minmax(fs, val.features), apply_minmax(ts, val.target)) if len(val) else None,
        target_scaler=ts, feature_scaler=fs,
    )
    context = block.features[len(block) - lookback + 1:] if lookback > 1 else block.features[:0]
    test_x = apply_minmax(fs, np.vstack([context, split.test.features]))
    pred = predict_network(fit, test_x, scaler=fs)
    if save:
        save_network(fit, save)
    _dump({
        "spec": spec.to_dict(),
        "final_train_mae": float(fit.train_loss_history[-1]),
        "final_validation_mae": fit.final_validation_loss if len(val) else None,
        "clip_events": fit.clip_events,
        "test_metrics": evaluate(split.test.target, pred, mape_policy="exclude").to_dict(),
        "saved_to": save,
    })


@main.command("eval")
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--mape-policy", type=click.Choice(["error", "exclude"]), default="error", show_default=True)
def eval_(csv_path, mape_policy):
    """Metrics for a two-column CSV of actual, predicted."""
    from .metrics import evaluate

    frame = pd.read_csv(csv_path)
    if frame.shape[1] != 2:
        raise click.BadParameter(f"expected 2 columns (actual, predicted), found {frame.shape[1]}")
    row = evaluate(frame.iloc[:, 0].to_numpy(float), frame.iloc[:, 1].to_numpy(float),
                   mape_policy=mape_policy)
    _dump(row.to_dict())


def _csv_list(value):
    return tuple(v.strip() for v in value.split(",") if v.strip()) if value else None


@main.command()
@click.option("--data-dir", envvar="AIRCAST_DATA_DIR", show_envvar=True,
              type=click.Path(exists=True, file_okay=False), help="Directory of station CSVs.")
@click.option("--out", "out_dir", default="aircast-report", show_default=True, type=click.Path(file_okay=False))
@click.option("--stations", help="Comma-separated station names (default: all twelve).")
@click.option("--models", help="Comma-separated subset of additive,arima,lstm,cnn.")
@click.option("--seed", default=0, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--epochs", help="Comma-separated epoch budgets (default: 200,400,600,800,1000).")
@click.option("--pattern", default="PRSA_Data_{station}_*.csv", show_default=True,
              help="File name pattern; {station} is replaced by the station name.")
def bench(data_dir, out_dir, stations, models, seed, workers, epochs, pattern):
    """Run every model family on each station and write the report."""
    from .bench.report import emit_report
    from .bench.runner import RunConfig, resolve_data_dir, run_bench

    kwargs = {"data_dir": resolve_data_dir(data_dir), "output_dir": out_dir, "seed": seed,
              "workers": workers, "file_pattern": pattern}
    if _csv_list(stations):
        kwargs["stations"] = _csv_list(stations)
    if _csv_list(models):
        kwargs["models"] = _csv_list(models)
    if _csv_list(epochs):
        kwargs["epochs_sweep"] = tuple(int(e) for e in _csv_list(epochs))
    config = RunConfig(**kwargs)
    report = emit_report(run_bench(config), out_dir, config)
    for family, (m, count) in report.averages.items():
        click.echo(f"{family:9s} stations={count} rmse={m.rmse:.2f} mae={m.mae:.2f} "
                   f"mape={m.mape:.2f} rrse={m.rrse:.3f}")
    click.echo(f"report written to {out_dir}")


@main.command()
@click.argument("directory", type=click.Path(file_okay=False))
@click.option("--station", default="Synthetic", show_default=True)
@click.option("--days", default=1461, show_default=True)
@click.option("--seed", default=0, show_default=True)
def synthetic(directory, station, days, seed):
    """Write a seeded synthetic station file in the hourly source layout."""
    from .bench.synthetic import write_synthetic_station

    click.echo(str(write_synthetic_station(directory, station, days=days, seed=seed)))


if __name__ == "__main__":  # pragma: no cover
    main()
