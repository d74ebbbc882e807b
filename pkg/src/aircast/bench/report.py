"""Benchmark report assembly and file output.

Files written to the output directory:

    station_metrics.csv / .txt   every sweep row; the .txt keeps selected rows only
    averages.csv / .txt          selected-row means per family, with reference values
    activations.csv / .txt       LSTM tanh vs relu means, with reference values
    manifest.json                resolved config, grids, policies, digests, timings
    plots/<station>.csv          date, actual and each family's selected forecast
    plots/<station>_<family>.svg line chart of actual vs forecast
"""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np

from ..additive import hyperparameter_grid
from ..errors import SelectionError
from ..metrics import MetricRow
from . import reference
from .runner import FAMILIES, POLICIES, RunConfig, network_spec, select_best
from .svg import line_chart

METRIC_FIELDS = ("rmse", "mae", "mape", "rrse")
ROW_FIELDS = ("station", "family", "index", "model", "variant", "criterion_name", "criterion",
              *METRIC_FIELDS, "selected", "status")


@dataclass
class EvalReport:
    rows: list
    averages: dict  # family -> (MetricRow, station count)
    activation_averages: dict  # activation -> (MetricRow, station count)
    manifest: dict = field(default_factory=dict)

    def selected_rows(self):
        return [r for r in self.rows if r.selected]


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if math.isfinite(v) else str(float(v))
    return str(v)


def _mean_row(rows) -> MetricRow:
    return MetricRow(*(float(np.mean([getattr(r.metrics, f) for r in rows])) for f in METRIC_FIELDS))


def _model_name(row) -> str:
    return row.label if row.family == "arima" else _model_name_for(row.family)


def build_report(reports, config: RunConfig | None = None) -> EvalReport:
    if not reports:
        raise SelectionError("no station completed; nothing to report")
    rows = [r for rep in reports for r in rep.rows]
    averages = {}
    for family in FAMILIES:
        chosen = [r for r in rows if r.family == family and r.selected]
        if chosen:
            averages[family] = (_mean_row(chosen), len(chosen))
    activation = {}
    acts = config.activations if config is not None else ("tanh", "relu")
    for act in acts:
        best = []
        for rep in reports:
            cand = [r for r in rep.rows if r.family == "lstm" and r.variant == act]
            try:
                best.append(select_best(cand, POLICIES["lstm"][0]))
            except SelectionError:
                continue
        if best:
            activation[act] = (_mean_row(best), len(best))
    return EvalReport(rows, averages, activation, _manifest(reports, config))


def _manifest(reports, config):
    try:
        version = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        version = "unknown"
    out = {
        "package_version": version,
        "config": config.to_dict() if config is not None else None,
        "selection": {
            "policies": {f: POLICIES[f][0] for f in FAMILIES},
            "tie_break": "first row in sweep order",
            "arima_search_tie_break": "smaller p+q, then smaller p",
        },
        "sweep_cells": {rep.station: {f: sum(r.family == f for r in rep.rows) for f in FAMILIES
                                      if any(r.family == f for r in rep.rows)}
                        for rep in reports},
        "stations": {},
    }
    if config is not None:
        grid = hyperparameter_grid(None if config.additive_grid is None else list(config.additive_grid))
        out["grids"] = {
            "additive": [c.to_dict() for c in grid],
            "arima": [[p, q] for p in range(config.p_max + 1) for q in range(config.q_max + 1)],
            "lstm": {"activations": list(config.activations), "epochs": list(config.epochs_sweep),
                     "spec": network_spec("lstm", "tanh", config).to_dict()},
            "cnn": {"epochs": list(config.epochs_sweep),
                    "spec": network_spec("cnn1d", "tanh", config).to_dict()},
        }
        out["seeds"] = {"network": config.seed}
    for rep in reports:
        fit_inputs = rep.digests["fit_inputs"]
        out["stations"][rep.station] = {
            "path": rep.path,
            "n_days": rep.n_days,
            "test_days": len(rep.test_dates),
            "test_range": [str(rep.test_dates[0]), str(rep.test_dates[-1])],
            "adf": rep.adf,
            "digests": rep.digests,
            "leakage_check": all(d == rep.digests["projection"] for d in fit_inputs.values()),
            "seconds": rep.seconds,
            "details": rep.extra,
        }
    out["generated_unix_time"] = time.time()
    return out


# ---------------------------------------------------------------------------
# writers


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_num(v) for v in r])


def _aligned(header, rows) -> str:
    cells = [list(header)] + [[_cell(v) for v in r] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = []
    for k, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) if i < 2 else c.rjust(w)
                               for i, (c, w) in enumerate(zip(row, widths))).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.3f}" if abs(v) < 1 else f"{v:.1f}"
    return str(v)


def _metric_values(m: MetricRow | None):
    return [None] * 4 if m is None else [m.rmse, m.mae, m.mape, m.rrse]


def emit_report(reports, output_dir, config: RunConfig | None = None) -> EvalReport:
    """Write every report file under ``output_dir`` and return the in-memory report."""
    report = build_report(reports, config)
    out = Path(output_dir)
    (out / "plots").mkdir(parents=True, exist_ok=True)

    _write_csv(out / "station_metrics.csv", ROW_FIELDS, [
        [r.station, r.family, r.index, r.label, r.variant, r.criterion_name, r.criterion,
         *_metric_values(r.metrics), r.selected, r.status]
        for r in report.rows
    ])
    text_rows = [[r.station, _model_name(r), *_metric_values(r.metrics)] for r in report.selected_rows()]
    (out / "station_metrics.txt").write_text(
        _aligned(("Station", "Model", "RMSE", "MAE", "MAPE", "RRSE"), text_rows))

    avg_header = ("family", "model", *METRIC_FIELDS, "stations", "reference_model",
                  *(f"reference_{f}" for f in METRIC_FIELDS))
    avg_rows = []
    for family, (m, count) in report.averages.items():
        avg_rows.append([family, _model_name_for(family), *_metric_values(m), count,
                         reference.FAMILY_NAMES[family], *reference.AVERAGES[family]])
    _write_csv(out / "averages.csv", avg_header, avg_rows)
    (out / "averages.txt").write_text(_aligned(
        ("Model", "Stations", "RMSE", "MAE", "MAPE", "RRSE", "ref RMSE", "ref MAE", "ref MAPE", "ref RRSE"),
        [[r[1], r[6], *r[2:6], *r[8:]] for r in avg_rows]))

    act_header = ("activation", *METRIC_FIELDS, "stations", *(f"reference_{f}" for f in METRIC_FIELDS))
    act_rows = [[a, *_metric_values(m), count, *reference.ACTIVATION_AVERAGES.get(a, (None,) * 4)]
                for a, (m, count) in report.activation_averages.items()]
    _write_csv(out / "activations.csv", act_header, act_rows)
    (out / "activations.txt").write_text(_aligned(
        ("Activation", "Stations", "RMSE", "MAE", "MAPE", "RRSE", "ref RMSE", "ref MAE", "ref MAPE", "ref RRSE"),
        [[r[0], r[5], *r[1:5], *r[6:]] for r in act_rows]))

    for rep in reports:
        _write_plots(out / "plots", rep)

    with open(out / "manifest.json", "w") as fh:
        json.dump(report.manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return report


def _model_name_for(family):
    return "Additive" if family == "additive" else reference.FAMILY_NAMES[family]


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"{type(o).__name__} is not JSON serialisable")


def _write_plots(directory: Path, rep):
    dates = [str(d) for d in rep.test_dates]
    header = ["date", "actual"]
    columns = [list(rep.test_actual)]
    for family in FAMILIES:
        fc = rep.selected.get(family)
        if fc is None:
            continue
        header += [family, f"{family}_lower", f"{family}_upper"]
        columns += [list(fc.point),
                    list(fc.lower) if fc.lower is not None else [None] * len(dates),
                    list(fc.upper) if fc.upper is not None else [None] * len(dates)]
        band = (fc.lower, fc.upper) if fc.lower is not None else None
        svg = line_chart(dates, {"actual": rep.test_actual, _model_name_for(family): fc.point},
                         band=band, title=f"{rep.station}: PM2.5 actual vs {_model_name_for(family)}")
        (directory / f"{rep.station}_{family}.svg").write_text(svg)
    _write_csv(directory / f"{rep.station}.csv", header,
               [[d, *(c[i] for c in columns)] for i, d in enumerate(dates)])
