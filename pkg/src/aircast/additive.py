"""Decomposable forecaster: piecewise-linear trend + Fourier seasonality + regressors.

    y(t) = g(t) + s(t) + h(t) + regressors + e(t)

g is continuous and piecewise linear with slope changes at fixed
changepoints, s is a sum of yearly and weekly Fourier series, h holds
optional holiday indicators. Fitting is a single penalized least-squares
solve (two in multiplicative mode): changepoint deltas are shrunk with
weight ``1 / trend_flexibility`` and seasonal/holiday coefficients with
``1 / seasonality_strength``; the base line and regressors are free.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np
from scipy.stats import norm

from .dataset import DailyDataset
from .errors import ConfigError, FeatureMismatchError, SingularMatrixError
from .forecast import ForecastResult

YEARLY_PERIOD = 365.25
WEEKLY_PERIOD = 7.0
MODES = ("additive", "multiplicative")


@dataclass(frozen=True)
class AdditiveConfig:
    n_changepoints: int = 25
    changepoint_range: float = 0.8
    trend_flexibility: float = 0.05
    seasonality_strength: float = 10.0
    seasonality_mode: str = "additive"
    yearly_order: int = 10
    weekly_order: int = 3
    interval_width: float = 0.95
    label: str = ""

    def __post_init__(self):
        if self.n_changepoints < 0 or self.yearly_order < 0 or self.weekly_order < 0:
            raise ConfigError("counts and Fourier orders must be >= 0")
        if not 0 < self.changepoint_range <= 1:
            raise ConfigError("changepoint_range must be in (0, 1]")
        if not (self.trend_flexibility > 0 and self.seasonality_strength > 0):
            raise ConfigError("trend_flexibility and seasonality_strength must be > 0")
        if self.seasonality_mode not in MODES:
            raise ConfigError(f"seasonality_mode must be one of {MODES}")
        if not 0 < self.interval_width < 1:
            raise ConfigError("interval_width must be in (0, 1)")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown additive config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class AdditiveFit:
    config: AdditiveConfig
    start: np.datetime64
    base_slope: float  # k, per day
    base_offset: float  # m, value of the trend at ``start``
    changepoint_times: np.ndarray
    changepoint_deltas: np.ndarray  # slope changes, per day
    fourier_coefficients: dict
    holiday_names: tuple
    holiday_dates: dict
    holiday_effects: np.ndarray
    regressor_names: tuple
    regressor_means: np.ndarray
    regressor_coefficients: np.ndarray
    residual_std: float

    def summary(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "k": self.base_slope,
            "m": self.base_offset,
            "changepoints": [str(d) for d in self.changepoint_times],
            "deltas": self.changepoint_deltas.tolist(),
            "fourier": {k: v.tolist() for k, v in self.fourier_coefficients.items()},
            "holiday_effects": self.holiday_effects.tolist(),
            "regressors": dict(zip(self.regressor_names, self.regressor_coefficients.tolist())),
            "residual_std": self.residual_std,
        }


def _days(dates) -> np.ndarray:
    return np.asarray(dates, dtype="datetime64[D]").astype(np.int64).astype(float)


def place_changepoints(train_dates, n_changepoints: int, changepoint_range: float = 0.8) -> np.ndarray:
    """Evenly spaced quantiles of the first ``changepoint_range`` of the history."""
    dates = np.asarray(train_dates, dtype="datetime64[D]")
    if n_changepoints == 0:
        return dates[:0]
    hist = int(math.floor(len(dates) * changepoint_range))
    if n_changepoints >= len(dates) * changepoint_range:
        raise ConfigError(
            f"{n_changepoints} changepoints do not fit in {hist} days of history"
        )
    idx = [hist * j // (n_changepoints + 1) for j in range(1, n_changepoints + 1)]
    return dates[idx]


def fourier_basis(dates, period_days: float, order: int) -> np.ndarray:
    """Columns sin(2 pi k t / P), cos(2 pi k t / P), k = 1..order; t in days since 1970-01-01."""
    if order < 1:
        raise ConfigError("Fourier order must be >= 1")
    t = dates if np.issubdtype(np.asarray(dates).dtype, np.number) else _days(dates)
    t = np.asarray(t, dtype=float)
    cols = []
    for k in range(1, order + 1):
        angle = 2.0 * np.pi * k * t / period_days
        cols += [np.sin(angle), np.cos(angle)]
    return np.column_stack(cols)


def _seasonal_blocks(dates, config: AdditiveConfig) -> dict:
    blocks = {}
    if config.yearly_order:
        blocks["yearly"] = fourier_basis(dates, YEARLY_PERIOD, config.yearly_order)
    if config.weekly_order:
        blocks["weekly"] = fourier_basis(dates, WEEKLY_PERIOD, config.weekly_order)
    return blocks


def _holiday_matrix(dates, names, holiday_dates) -> np.ndarray:
    d = np.asarray(dates, dtype="datetime64[D]")
    cols = [np.isin(d, np.asarray(holiday_dates[name], dtype="datetime64[D]")).astype(float)
            for name in names]
    return np.column_stack(cols) if cols else np.zeros((len(d), 0))


def _penalized_lstsq(X, y, penalty):
    """argmin ||y - X b||^2 + sum(penalty * b^2), via the augmented system."""
    keep = penalty > 0
    aug = np.vstack([X, np.diag(np.sqrt(penalty))[keep]])
    rhs = np.concatenate([y, np.zeros(int(keep.sum()))])
    coef, _, rank, _ = np.linalg.lstsq(aug, rhs, rcond=None)
    if rank < X.shape[1]:
        raise SingularMatrixError("penalized design is rank deficient")
    return coef


def _weight(scale: float) -> float:
    return 0.0 if math.isinf(scale) else 1.0 / scale


def fit_additive(train: DailyDataset, config: AdditiveConfig = AdditiveConfig(),
                 holidays: dict | None = None) -> AdditiveFit:
    """Fit the decomposable model to a daily training set.

    ``train.features`` are used as extra regressors. ``holidays`` maps a
    holiday name to its dates. Internally y is divided by max|y| and time by
    the training span so penalty weights do not depend on units; all
    returned coefficients are in the original units.
    """
    dates = np.asarray(train.dates, dtype="datetime64[D]")
    y = np.asarray(train.target, dtype=float)
    n = len(y)
    if n == 0:
        raise ValueError("empty training set")
    R = np.asarray(train.features, dtype=float)
    if not np.all(np.isfinite(R)):
        raise ValueError("regressors must be finite")

    start = dates[0]
    t = _days(dates) - _days(start)
    span = t[-1] if t[-1] > 0 else 1.0
    y_scale = float(np.max(np.abs(y))) or 1.0
    ts, ys = t / span, y / y_scale

    cps = place_changepoints(dates, config.n_changepoints, config.changepoint_range)
    cp_t = (_days(cps) - _days(start)) / span
    hinge = np.maximum(0.0, ts[:, None] - cp_t[None, :])

    seasonal = _seasonal_blocks(dates, config)
    S = np.hstack(list(seasonal.values())) if seasonal else np.zeros((n, 0))
    holidays = holidays or {}
    h_names = tuple(sorted(holidays))
    H = _holiday_matrix(dates, h_names, holidays)

    r_mean = R.mean(axis=0) if R.shape[1] else np.zeros(0)
    r_std = R.std(axis=0) if R.shape[1] else np.zeros(0)
    live = r_std > 0  # constant regressors carry no information; their coefficient is 0
    Rs = (R[:, live] - r_mean[live]) / r_std[live]

    n_cp, n_s, n_h = hinge.shape[1], S.shape[1], H.shape[1]
    penalty = np.concatenate([
        np.zeros(2),
        np.full(n_cp, _weight(config.trend_flexibility)),
        np.full(n_s + n_h, _weight(config.seasonality_strength)),
        np.zeros(Rs.shape[1]),
    ])
    base = np.column_stack([np.ones(n), ts])

    def solve(seasonal_cols):
        X = np.hstack([base, hinge, seasonal_cols, H, Rs])
        return _penalized_lstsq(X, ys, penalty)

    coef = solve(S)
    if config.seasonality_mode == "multiplicative":
        # linearize around the additive pass: seasonal columns scaled by its trend
        trend = base @ coef[:2] + hinge @ coef[2:2 + n_cp]
        coef = solve(S * trend[:, None])

    m_s, k_s = coef[:2]
    delta_s = coef[2:2 + n_cp]
    beta_s = coef[2 + n_cp:2 + n_cp + n_s]
    hol_s = coef[2 + n_cp + n_s:2 + n_cp + n_s + n_h]
    reg_s = coef[2 + n_cp + n_s + n_h:]

    multiplicative = config.seasonality_mode == "multiplicative"
    fourier, i = {}, 0
    for name, block in seasonal.items():
        w = block.shape[1]
        # multiplicative coefficients are unitless fractions of the trend
        fourier[name] = beta_s[i:i + w] * (1.0 if multiplicative else y_scale)
        i += w
    reg = np.zeros(R.shape[1])
    reg[live] = reg_s * y_scale / r_std[live]

    fit = AdditiveFit(
        config=config,
        start=start,
        base_slope=float(k_s * y_scale / span),
        base_offset=float(m_s * y_scale),
        changepoint_times=cps,
        changepoint_deltas=delta_s * y_scale / span,
        fourier_coefficients=fourier,
        holiday_names=h_names,
        holiday_dates={k: np.asarray(v, dtype="datetime64[D]") for k, v in holidays.items()},
        holiday_effects=hol_s * y_scale,
        regressor_names=tuple(train.feature_names),
        regressor_means=r_mean,
        regressor_coefficients=reg,
        residual_std=0.0,
    )
    resid = y - _point(fit, dates, R)
    return replace(fit, residual_std=float(np.sqrt(np.mean(resid**2))))


def trend_at(fit: AdditiveFit, dates) -> np.ndarray:
    t = _days(dates) - _days(fit.start)
    cp = _days(fit.changepoint_times) - _days(fit.start)
    g = fit.base_offset + fit.base_slope * t
    if len(cp):
        g = g + np.maximum(0.0, t[:, None] - cp[None, :]) @ fit.changepoint_deltas
    return g


def additive_components(fit: AdditiveFit, dates, regressors=None) -> dict:
    """Per-component contributions; the point forecast is their sum."""
    dates = np.asarray(dates, dtype="datetime64[D]")
    R = _check_regressors(fit, regressors, len(dates))
    trend = trend_at(fit, dates)
    s = np.zeros(len(dates))
    blocks = _seasonal_blocks(dates, fit.config)
    for name, block in blocks.items():
        s = s + block @ fit.fourier_coefficients[name]
    if fit.config.seasonality_mode == "multiplicative":
        s = s * trend
    h = _holiday_matrix(dates, fit.holiday_names, fit.holiday_dates) @ fit.holiday_effects
    reg = (R - fit.regressor_means) @ fit.regressor_coefficients if R.shape[1] else np.zeros(len(dates))
    return {"trend": trend, "seasonal": s, "holidays": h, "regressors": reg}


def _check_regressors(fit, regressors, n):
    k = len(fit.regressor_names)
    if regressors is None:
        if k:
            raise FeatureMismatchError(f"model expects {k} regressors, none given")
        return np.zeros((n, 0))
    R = np.asarray(regressors, dtype=float)
    if R.ndim == 1:
        R = R[:, None]
    if R.shape != (n, k):
        raise FeatureMismatchError(f"regressors have shape {R.shape}, expected {(n, k)}")
    return R


def _point(fit, dates, regressors):
    return sum(additive_components(fit, dates, regressors).values())


def predict_additive(fit: AdditiveFit, dates, regressors=None) -> ForecastResult:
    dates = np.asarray(dates, dtype="datetime64[D]")
    point = _point(fit, dates, regressors)
    z = float(norm.ppf(0.5 + fit.config.interval_width / 2.0))
    half = z * fit.residual_std
    return ForecastResult(point=point, dates=dates, lower=point - half, upper=point + half)


# ---------------------------------------------------------------------------
# hyperparameter sweep

GRID_FLEXIBILITY = (0.001, 0.01, 0.1, 0.5)
GRID_SEASONALITY = (0.01, 0.1, 1.0, 10.0)
GRID_CHANGEPOINTS = (15, 25, 35)
GRID_MODES = ("additive", "multiplicative", "additive-no-weekly")


def hyperparameter_grid(overrides: list[dict] | None = None) -> list[AdditiveConfig]:
    """The default 144-cell sweep, or the configs given in ``overrides``."""
    if overrides is not None:
        return [AdditiveConfig.from_dict(d) for d in overrides]
    grid = []
    for flex, strength, n_cp, mode in itertools.product(
        GRID_FLEXIBILITY, GRID_SEASONALITY, GRID_CHANGEPOINTS, GRID_MODES
    ):
        weekly = 0 if mode == "additive-no-weekly" else AdditiveConfig.weekly_order
        grid.append(AdditiveConfig(
            n_changepoints=n_cp,
            trend_flexibility=flex,
            seasonality_strength=strength,
            seasonality_mode="multiplicative" if mode == "multiplicative" else "additive",
            weekly_order=weekly,
            interval_width=0.95,
            label=f"flex={flex:g} season={strength:g} cp={n_cp} mode={mode}",
        ))
    return grid


def load_grid(path) -> list[AdditiveConfig]:
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = [data]
    return hyperparameter_grid(data)
