"""Forecast error metrics: RMSE, MAE, MAPE, RRSE.

``actual`` is always the first argument. numpy reductions over contiguous
float64 arrays use pairwise summation, which keeps long sums accurate.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateDenominatorError, ZeroDenominatorError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricRow:
    rmse: float
    mae: float
    mape: float
    rrse: float

    def to_dict(self):
        return asdict(self)


def _pair(actual, predicted):
    x = np.ascontiguousarray(actual, dtype=float).ravel()
    y = np.ascontiguousarray(predicted, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} actual vs {y.size} predicted")
    if x.size == 0:
        raise ValueError("metrics need at least one observation")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("metrics inputs must be finite")
    return x, y


def rmse(actual, predicted) -> float:
    x, y = _pair(actual, predicted)
    d = x - y
    return float(np.sqrt(np.mean(d * d)))


def mae(actual, predicted) -> float:
    x, y = _pair(actual, predicted)
    return float(np.mean(np.abs(x - y)))


def mape(actual, predicted, epsilon_guard: float = 1e-9, policy: str = "error") -> float:
    """Mean absolute percentage error, in percent.

    ``policy="exclude"`` drops observations whose actual value is within
    ``epsilon_guard`` of zero instead of raising.
    """
    if policy not in ("error", "exclude"):
        raise ValueError(f"policy must be 'error' or 'exclude', got {policy!r}")
    x, y = _pair(actual, predicted)
    small = np.abs(x) <= epsilon_guard
    if small.any():
        if policy != "exclude":
            raise ZeroDenominatorError(np.flatnonzero(small))
        log.warning("mape: excluding %d near-zero actual values", int(small.sum()))
        x, y = x[~small], y[~small]
        if x.size == 0:
            raise ZeroDenominatorError(np.flatnonzero(small))
    return float(100.0 * np.mean(np.abs(x - y) / np.abs(x)))


def rrse(actual, predicted) -> float:
    x, y = _pair(actual, predicted)
    dev = x - x.mean()
    denom = float(np.sum(dev * dev))
    if denom <= 0.0:
        raise DegenerateDenominatorError("rrse undefined for constant actual values")
    d = y - x
    return float(np.sqrt(np.sum(d * d) / denom))


def evaluate(actual, predicted, mape_policy: str = "error") -> MetricRow:
    return MetricRow(
        rmse=rmse(actual, predicted),
        mae=mae(actual, predicted),
        mape=mape(actual, predicted, policy=mape_policy),
        rrse=rrse(actual, predicted),
    )
