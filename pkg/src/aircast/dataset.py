"""Station CSV ingestion, cleaning, daily aggregation, splitting and scaling.

The raw input is one UCI Beijing Multi-Site file per station: hourly rows with
18 columns. The pipeline is

    parse_station_csv -> forward_fill -> encode_wind_direction -> aggregate_daily
    -> chronological_split -> fit_minmax / apply_minmax
"""
from __future__ import annotations

import io
import json
import os
from dataclasses import dataclass, field, replace
from typing import BinaryIO, Sequence

import numpy as np
import pandas as pd

from .errors import (
    DomainError,
    EmptyInputError,
    GapError,
    ParseError,
    SchemaError,
    SplitError,
    StateMismatchError,
    UnfillableColumnError,
)

TARGET = "PM2.5"
TIME_COLUMNS = ("year", "month", "day", "hour")
NUMERIC_COLUMNS = (
    "No", "year", "month", "day", "hour",
    "PM2.5", "PM10", "SO2", "NO2", "CO", "O3",
    "TEMP", "PRES", "DEWP", "RAIN", "WSPM",
)
REQUIRED_COLUMNS = NUMERIC_COLUMNS + ("wd", "station")
# exogenous regressors, in the order they appear in the source file
FEATURE_COLUMNS = ("PM10", "SO2", "NO2", "CO", "O3", "TEMP", "PRES", "DEWP", "RAIN", "wd", "WSPM")
_FILLABLE = tuple(c for c in NUMERIC_COLUMNS if c not in TIME_COLUMNS and c != "No") + ("wd",)


@dataclass(frozen=True)
class RawTable:
    """Hourly records of one station.

    ``wd_mapping`` is empty until :func:`encode_wind_direction` has run.
    """

    frame: pd.DataFrame
    station: str
    wd_mapping: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.frame)


@dataclass(frozen=True)
class DailyDataset:
    dates: np.ndarray  # datetime64[D]
    target: np.ndarray
    features: np.ndarray  # [n_days, n_features]
    feature_names: tuple
    station: str = ""
    wd_mapping: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.dates)
        if len(self.target) != n or self.features.shape[0] != n:
            raise ValueError("dates, target and features must have equal length")
        if self.features.ndim != 2 or self.features.shape[1] != len(self.feature_names):
            raise ValueError("features must be [n_days, len(feature_names)]")
        if n > 1 and np.any(np.diff(self.dates).astype(np.int64) != 1):
            raise ValueError("dates must be contiguous daily steps")

    def __len__(self):
        return len(self.dates)

    def slice(self, start, stop):
        return replace(
            self,
            dates=self.dates[start:stop],
            target=self.target[start:stop],
            features=self.features[start:stop],
        )

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.features, columns=list(self.feature_names))
        frame.insert(0, TARGET, self.target)
        frame.insert(0, "date", pd.to_datetime(self.dates).strftime("%Y-%m-%d"))
        return frame


@dataclass(frozen=True)
class SplitBundle:
    train: DailyDataset
    validation: DailyDataset
    test: DailyDataset

    @property
    def block(self) -> DailyDataset:
        """Training block: train followed by validation."""
        return _concat(self.train, self.validation)


def _concat(a: DailyDataset, b: DailyDataset) -> DailyDataset:
    if len(b) == 0:
        return a
    return replace(
        a,
        dates=np.concatenate([a.dates, b.dates]),
        target=np.concatenate([a.target, b.target]),
        features=np.vstack([a.features, b.features]),
    )


@dataclass(frozen=True)
class ScalerState:
    mins: np.ndarray
    maxs: np.ndarray
    labels: tuple

    def to_dict(self):
        return {"labels": list(self.labels), "min": self.mins.tolist(), "max": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["min"], float), np.asarray(d["max"], float), tuple(d["labels"]))

    def __eq__(self, other):
        if not isinstance(other, ScalerState):
            return NotImplemented
        return (
            self.labels == other.labels
            and np.array_equal(self.mins, other.mins)
            and np.array_equal(self.maxs, other.maxs)
        )

    __hash__ = None


# ---------------------------------------------------------------------------
# parsing and cleaning


def parse_station_csv(source: BinaryIO | str | os.PathLike) -> RawTable:
    """Read one station's hourly CSV into a typed :class:`RawTable`.

    Empty cells and the literal ``NA`` become missing values. Columns may
    appear in any order; extra columns are ignored.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    raw = pd.read_csv(io.StringIO(data), dtype=str, keep_default_na=False)
    raw.columns = [c.strip() for c in raw.columns]
    for col in REQUIRED_COLUMNS:
        if col not in raw.columns:
            raise SchemaError(col)
    if len(raw) == 0:
        raise EmptyInputError("station file has a header but no data rows")

    out = {}
    for col in NUMERIC_COLUMNS:
        text = raw[col].str.strip()
        missing = text.isin(["", "NA", "NaN", "nan"])
        values = pd.to_numeric(text.where(~missing), errors="coerce")
        bad = values.isna() & ~missing
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise ParseError(col, row, raw[col].iloc[row])
        out[col] = values.astype(float)
    for col in TIME_COLUMNS:
        if out[col].isna().any():
            row = int(np.flatnonzero(out[col].isna().to_numpy())[0])
            raise ParseError(col, row, "")
    wd = raw["wd"].str.strip()
    out["wd"] = wd.where(~wd.isin(["", "NA"]), None)
    stations = raw["station"].str.strip().unique()
    if len(stations) != 1:
        raise DomainError(f"expected one station per file, found {sorted(stations)}")

    frame = pd.DataFrame(out)
    _validate_time(frame)
    return RawTable(frame=frame, station=str(stations[0]))


def _validate_time(frame: pd.DataFrame) -> None:
    hour = frame["hour"].to_numpy()
    bad = np.flatnonzero((hour < 0) | (hour > 23) | (hour != np.floor(hour)))
    if bad.size:
        raise DomainError(f"hour out of range [0, 23] at row {bad[0]}: {hour[bad[0]]:g}")
    month = frame["month"].to_numpy()
    bad = np.flatnonzero((month < 1) | (month > 12))
    if bad.size:
        raise DomainError(f"month out of range [1, 12] at row {bad[0]}: {month[bad[0]]:g}")
    stamps = pd.to_datetime(
        frame[["year", "month", "day", "hour"]].astype(int), errors="coerce"
    )
    if stamps.isna().any():
        row = int(np.flatnonzero(stamps.isna().to_numpy())[0])
        raise DomainError(f"invalid calendar date at row {row}")
    if len(stamps) > 1 and not (np.diff(stamps.to_numpy()).astype(np.int64) > 0).all():
        row = int(np.flatnonzero(np.diff(stamps.to_numpy()).astype(np.int64) <= 0)[0]) + 1
        raise DomainError(f"rows not strictly increasing in time at row {row}")


def forward_fill(table: RawTable) -> RawTable:
    """Replace missing cells with the last observed value in their column.

    Missing cells before a column's first observation take that first
    observation instead, so no rows are lost.
    """
    frame = table.frame.copy()
    for col in _FILLABLE:
        if col not in frame:
            continue
        if frame[col].isna().all():
            raise UnfillableColumnError(col)
        frame[col] = frame[col].ffill().bfill()
    return replace(table, frame=frame)


def encode_wind_direction(table: RawTable) -> RawTable:
    frame = table.frame.copy()
    wd = frame["wd"]
    if wd.isna().any():
        raise ValueError("wd has missing values; run forward_fill first")
    if pd.api.types.is_numeric_dtype(wd):
        return table
    categories = sorted(wd.unique())
    mapping = {c: i for i, c in enumerate(categories)}
    frame["wd"] = wd.map(mapping).astype(float)
    return replace(table, frame=frame, wd_mapping=mapping)


def aggregate_daily(table: RawTable) -> DailyDataset:
    """Average each calendar day's hourly rows into one row."""
    frame = table.frame
    if not pd.api.types.is_numeric_dtype(frame["wd"]):
        raise ValueError("wd must be encoded before daily aggregation")
    dates = pd.to_datetime(frame[["year", "month", "day"]].astype(int)).dt.normalize()
    columns = [TARGET, *FEATURE_COLUMNS]
    daily = frame[columns].groupby(dates.to_numpy()).mean()
    if daily.isna().any().any():
        col = daily.columns[daily.isna().any()][0]
        raise ValueError(f"column {col!r} still has missing values; run forward_fill first")
    full = pd.date_range(daily.index[0], daily.index[-1], freq="D")
    if len(full) != len(daily):
        missing = full.difference(daily.index)[0]
        raise GapError(missing.strftime("%Y-%m-%d"))
    return DailyDataset(
        dates=daily.index.to_numpy().astype("datetime64[D]"),
        target=daily[TARGET].to_numpy(dtype=float),
        features=daily[list(FEATURE_COLUMNS)].to_numpy(dtype=float),
        feature_names=FEATURE_COLUMNS,
        station=table.station,
        wd_mapping=dict(table.wd_mapping),
    )


def load_station(path) -> DailyDataset:
    """parse -> fill -> encode -> aggregate in one call."""
    return aggregate_daily(encode_wind_direction(forward_fill(parse_station_csv(path))))


# ---------------------------------------------------------------------------
# splitting


def chronological_split(
    data: DailyDataset, train_fraction: float = 0.75, validation_fraction_of_train: float = 0.0
) -> SplitBundle:
    if not 0 < train_fraction < 1:
        raise SplitError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if not 0 <= validation_fraction_of_train < 1:
        raise SplitError(
            f"validation_fraction_of_train must be in [0, 1), got {validation_fraction_of_train}"
        )
    n = len(data)
    if n == 0:
        raise SplitError("cannot split an empty dataset")
    block = int(np.floor(n * train_fraction))
    n_val = int(np.floor(block * validation_fraction_of_train))
    n_train = block - n_val
    if n_train == 0 or block == n:
        raise SplitError(f"split of {n} rows at {train_fraction} leaves an empty partition")
    if validation_fraction_of_train > 0 and n_val == 0:
        raise SplitError(f"validation fraction {validation_fraction_of_train} of {block} rows is empty")
    return SplitBundle(
        train=data.slice(0, n_train),
        validation=data.slice(n_train, block),
        test=data.slice(block, n),
    )


# ---------------------------------------------------------------------------
# min-max scaling


def _as_2d(data):
    arr = np.asarray(data, dtype=float)
    return (arr[:, None], True) if arr.ndim == 1 else (arr, False)


def fit_minmax(data, labels: Sequence[str] | None = None) -> ScalerState:
    arr, _ = _as_2d(data)
    if labels is None:
        labels = tuple(f"c{i}" for i in range(arr.shape[1]))
    if len(labels) != arr.shape[1]:
        raise StateMismatchError("label count does not match column count")
    return ScalerState(arr.min(axis=0), arr.max(axis=0), tuple(labels))


def _check(state: ScalerState, arr: np.ndarray, labels) -> None:
    if arr.shape[1] != len(state.labels):
        raise StateMismatchError(
            f"data has {arr.shape[1]} columns, scaler was fitted on {len(state.labels)}"
        )
    if labels is not None and tuple(labels) != state.labels:
        raise StateMismatchError(f"column labels {tuple(labels)} != fitted {state.labels}")


def apply_minmax(state: ScalerState, data, labels=None) -> np.ndarray:
    """Map each column to ``(x - min) / (max - min)``; degenerate columns map to 0."""
    arr, flat = _as_2d(data)
    _check(state, arr, labels)
    span = state.maxs - state.mins
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (arr - state.mins) / safe, 0.0)
    return out[:, 0] if flat else out


def invert_minmax(state: ScalerState, data, labels=None) -> np.ndarray:
    arr, flat = _as_2d(data)
    _check(state, arr, labels)
    span = state.maxs - state.mins
    out = arr * span + state.mins
    return out[:, 0] if flat else out


# ---------------------------------------------------------------------------
# output


def write_daily(data: DailyDataset, csv_path, sidecar_path=None, scaler: ScalerState | None = None):
    """Write the cleaned daily CSV and a JSON sidecar (wd codes, scaler state)."""
    data.to_frame().to_csv(csv_path, index=False, float_format="%.10g", lineterminator="\n")
    if sidecar_path is not None:
        meta = {
            "station": data.station,
            "n_days": len(data),
            "wd_mapping": data.wd_mapping,
            "scaler": scaler.to_dict() if scaler is not None else None,
        }
        with open(sidecar_path, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)


def read_daily(csv_path, station: str = "") -> DailyDataset:
    frame = pd.read_csv(csv_path)
    dates = pd.to_datetime(frame["date"]).to_numpy().astype("datetime64[D]")
    names = tuple(c for c in frame.columns if c not in ("date", TARGET))
    return DailyDataset(
        dates=dates,
        target=frame[TARGET].to_numpy(float),
        features=frame[list(names)].to_numpy(float),
        feature_names=names,
        station=station,
    )
