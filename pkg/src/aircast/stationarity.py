"""Least squares and (augmented) Dickey-Fuller unit-root testing."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import DegenerateSeriesError, SeriesLengthError, SingularMatrixError


def difference(series, order: int = 1) -> np.ndarray:
    """Return the ``order``-th difference; ``order=0`` is the identity."""
    x = np.asarray(series, dtype=float)
    if order < 0:
        raise ValueError("difference order must be >= 0")
    if order >= len(x):
        raise SeriesLengthError(f"cannot difference {len(x)} values {order} times")
    return np.diff(x, n=order) if order else x.copy()


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    residuals: np.ndarray
    standard_errors: np.ndarray
    residual_variance: float
    n_obs: int
    n_params: int

    @property
    def rss(self) -> float:
        return float(self.residuals @ self.residuals)

    @property
    def aic(self) -> float:
        # Gaussian concentrated log-likelihood, constants dropped
        return self.n_obs * math.log(self.rss / self.n_obs) + 2 * self.n_params


def ols(design, response) -> OlsFit:
    X = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if n != len(y):
        raise ValueError(f"design has {n} rows, response has {len(y)}")
    if n <= k:
        raise SeriesLengthError(f"need more rows ({n}) than columns ({k})")
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if diag.max() == 0 or diag.min() <= 1e-10 * diag.max():
        raise SingularMatrixError("design matrix is rank deficient")
    beta = np.linalg.solve(r, q.T @ y)
    resid = y - X @ beta
    s2 = float(resid @ resid) / (n - k)
    r_inv = np.linalg.solve(r, np.eye(k))
    xtx_inv_diag = np.sum(r_inv**2, axis=1)
    return OlsFit(
        coefficients=beta,
        residuals=resid,
        standard_errors=np.sqrt(s2 * xtx_inv_diag),
        residual_variance=s2,
        n_obs=n,
        n_params=k,
    )


class RegressionKind(str, enum.Enum):
    CONSTANT = "c"
    CONSTANT_TREND = "ct"


# MacKinnon (1994), "Approximate Asymptotic Distribution Functions for
# Unit-Root and Cointegration Tests", JBES 12(2), Table 3 rows for N=1.
# p = Phi(poly(tau)); the small-p polynomial applies at or below tau_star.
_MACKINNON = {
    RegressionKind.CONSTANT: dict(
        tau_min=-18.83, tau_max=2.74, tau_star=-1.61,
        small=(2.1659, 1.4412, 3.8269e-2),
        large=(1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2),
    ),
    RegressionKind.CONSTANT_TREND: dict(
        tau_min=-16.18, tau_max=0.7, tau_star=-2.89,
        small=(3.2512, 1.6047, 4.9588e-2),
        large=(2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2),
    ),
}


def _turning_points(coef):
    roots = np.polynomial.Polynomial(coef).deriv().roots()
    return [float(r.real) for r in roots if abs(r.imag) < 1e-12]


def mackinnon_pvalue(stat: float, kind: RegressionKind | str) -> float:
    table = _MACKINNON[RegressionKind(kind)]
    if stat > table["tau_max"]:
        return 1.0
    if stat < table["tau_min"]:
        return 0.0
    # Both polynomials turn over just inside their cut-offs; holding them
    # flat beyond the turning point keeps p monotone in the statistic.
    if stat <= table["tau_star"]:
        coef = table["small"]
        lo = [r for r in _turning_points(coef) if table["tau_min"] <= r <= table["tau_star"]]
        stat = max([stat, *lo])
    else:
        coef = table["large"]
        hi = [r for r in _turning_points(coef) if table["tau_star"] < r <= table["tau_max"]]
        stat = min([stat, *hi])
    z = sum(c * stat**i for i, c in enumerate(coef))
    return float(norm.cdf(z))


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    lag_order: int
    regression_kind: RegressionKind
    coefficient_alpha: float
    lag_coefficients: np.ndarray
    deterministic: np.ndarray  # constant (and trend) coefficients
    residuals: np.ndarray
    p_value: float
    reject_unit_root_at_5pct: bool
    n_obs: int

    def to_dict(self):
        return {
            "statistic": self.statistic,
            "lag_order": self.lag_order,
            "regression": self.regression_kind.value,
            "alpha": self.coefficient_alpha,
            "lag_coefficients": self.lag_coefficients.tolist(),
            "p_value": self.p_value,
            "stationary": self.reject_unit_root_at_5pct,
            "n_obs": self.n_obs,
        }


def schwert_max_lag(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def _adf_design(y: np.ndarray, lags: int, start: int, kind: RegressionKind):
    """Rows t = start..n-1 of the regression of dy_t on deterministics, y_{t-1}, dy lags."""
    dy = np.diff(y)  # dy[t-1] = y_t - y_{t-1}
    t = np.arange(start, len(y))
    cols = [np.ones(len(t))]
    if kind is RegressionKind.CONSTANT_TREND:
        cols.append(t.astype(float))
    cols.append(y[t - 1])
    for j in range(1, lags + 1):
        cols.append(dy[t - 1 - j])
    return np.column_stack(cols), dy[t - 1]


def adf_test(
    series,
    max_lag: int | None = None,
    regression: RegressionKind | str = RegressionKind.CONSTANT_TREND,
) -> AdfResult:
    """Augmented Dickey-Fuller test with AIC lag selection.

    The lag order is chosen from 0..max_lag on a common estimation sample,
    then the chosen model is refitted on every usable observation.
    ``max_lag=None`` applies Schwert's rule.
    """
    y = np.asarray(series, dtype=float)
    kind = RegressionKind(regression)
    if not np.all(np.isfinite(y)):
        raise ValueError("series contains non-finite values")
    if max_lag is None:
        max_lag = schwert_max_lag(len(y))
    if len(y) < 20 + max_lag:
        raise SeriesLengthError(f"need at least {20 + max_lag} observations, got {len(y)}")
    if np.ptp(y) == 0:
        raise DegenerateSeriesError("series is constant")

    n_det = 2 if kind is RegressionKind.CONSTANT_TREND else 1
    best_lag, best_aic = 0, math.inf
    start = max_lag + 1
    for lag in range(max_lag + 1):
        X, dy = _adf_design(y, lag, start, kind)
        aic = ols(X, dy).aic
        if aic < best_aic - 1e-12:
            best_lag, best_aic = lag, aic

    X, dy = _adf_design(y, best_lag, best_lag + 1, kind)
    fit = ols(X, dy)
    stat = float(fit.coefficients[n_det] / fit.standard_errors[n_det])
    p = mackinnon_pvalue(stat, kind)
    return AdfResult(
        statistic=stat,
        lag_order=best_lag,
        regression_kind=kind,
        # levels-form coefficient on y_{t-1}; unit root <=> alpha == 1
        coefficient_alpha=float(fit.coefficients[n_det]) + 1.0,
        lag_coefficients=fit.coefficients[n_det + 1:].copy(),
        deterministic=fit.coefficients[:n_det].copy(),
        residuals=fit.residuals,
        p_value=p,
        reject_unit_root_at_5pct=p < 0.05,
        n_obs=fit.n_obs,
    )
