"""ARIMA(p, d, q) with exogenous regressors, fitted by conditional sum of squares.

The model on the d-times differenced series w is

    w_t = alpha + sum_i beta_i w_{t-i} + sum_j phi_j eps_{t-j} + gamma . x_t + eps_t

with presample residuals fixed at zero. For a fixed MA polynomial the
residuals are linear in (alpha, beta, gamma), so those are solved exactly by
least squares on filtered columns and the simplex search runs over the MA
coefficients only.
"""
from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from .errors import (
    ConvergenceError,
    ExhaustedSearchError,
    FeatureMismatchError,
    SeriesLengthError,
)
from .forecast import ForecastResult
from .stationarity import difference

log = logging.getLogger(__name__)

# With zero presample shocks, CSS rewards MA roots on the unit circle
# (spurious likelihood gains of 10+ on white noise); every MA root is kept
# outside this radius.
MA_ROOT_RADIUS = 1.05


@dataclass(frozen=True)
class ArimaSpec:
    p: int = 0
    d: int = 0
    q: int = 0
    include_intercept: bool = True

    def __post_init__(self):
        if min(self.p, self.d, self.q) < 0:
            raise ValueError(f"ARIMA orders must be >= 0, got {self}")

    @property
    def order(self):
        return (self.p, self.d, self.q)

    def n_params(self, n_exog: int) -> int:
        return int(self.include_intercept) + self.p + self.q + n_exog


@dataclass(frozen=True)
class GridCell:
    p: int
    q: int
    aic: float | None
    status: str  # "ok" or the failure reason


@dataclass(frozen=True)
class ArimaFit:
    spec: ArimaSpec
    intercept: float
    ar_coefficients: np.ndarray
    ma_coefficients: np.ndarray
    exog_coefficients: np.ndarray
    innovation_variance: float
    log_likelihood: float
    aic: float
    residuals: np.ndarray
    # last max(p, q) differenced levels and residuals
    tail_levels: np.ndarray
    tail_residuals: np.ndarray
    # last value of the series at each differencing depth 0..d-1
    undiff_anchors: np.ndarray
    warnings: tuple = ()
    search: tuple = field(default=(), repr=False)

    @property
    def n_exog(self) -> int:
        return len(self.exog_coefficients)

    @property
    def params(self) -> np.ndarray:
        return pack_params(self.spec, self.intercept, self.ar_coefficients,
                           self.ma_coefficients, self.exog_coefficients)

    def summary(self) -> dict:
        return {
            "order": list(self.spec.order),
            "intercept": self.intercept,
            "ar": self.ar_coefficients.tolist(),
            "ma": self.ma_coefficients.tolist(),
            "exog": self.exog_coefficients.tolist(),
            "sigma2": self.innovation_variance,
            "log_likelihood": self.log_likelihood,
            "aic": self.aic,
            "warnings": list(self.warnings),
        }


def pack_params(spec, intercept, ar, ma, exog) -> np.ndarray:
    head = [intercept] if spec.include_intercept else []
    return np.concatenate([head, ar, ma, exog]).astype(float)


def unpack_params(params, spec: ArimaSpec, n_exog: int):
    params = np.asarray(params, dtype=float)
    if len(params) != spec.n_params(n_exog):
        raise ValueError(f"expected {spec.n_params(n_exog)} parameters, got {len(params)}")
    i = 0
    intercept = 0.0
    if spec.include_intercept:
        intercept, i = float(params[0]), 1
    ar = params[i:i + spec.p]
    ma = params[i + spec.p:i + spec.p + spec.q]
    exog = params[i + spec.p + spec.q:]
    return intercept, ar, ma, exog


def _exog_matrix(exog, n: int) -> np.ndarray:
    if exog is None:
        return np.zeros((n, 0))
    X = np.asarray(exog, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != n:
        raise FeatureMismatchError(f"exog has {X.shape[0]} rows, series has {n}")
    return X


def _lag_matrix(w: np.ndarray, p: int) -> np.ndarray:
    n = len(w)
    return np.column_stack([w[p - i:n - i] for i in range(1, p + 1)]) if p else np.zeros((n - p, 0))


def _residuals(params, w, X, spec):
    intercept, ar, ma, gamma = unpack_params(params, spec, X.shape[1])
    p = spec.p
    e = w[p:] - intercept - X[p:] @ gamma
    if p:
        e = e - _lag_matrix(w, p) @ ar
    if spec.q:
        e = lfilter([1.0], np.concatenate([[1.0], ma]), e)
    return e


def css_negative_loglik(params, series, exog, spec: ArimaSpec) -> float:
    """Gaussian negative log-likelihood under the CSS approximation.

    ``series`` must already be differenced ``spec.d`` times. Returns +inf
    when the residual recursion blows up.
    """
    w = np.asarray(series, dtype=float)
    X = _exog_matrix(exog, len(w))
    with np.errstate(all="ignore"):
        eps = _residuals(params, w, X, spec)
        n = len(eps)
        rss = float(eps @ eps)
    if not math.isfinite(rss) or rss <= 0.0:
        return math.inf
    return 0.5 * n * (math.log(2.0 * math.pi * rss / n) + 1.0)


def _linear_block(w, X, spec):
    """Columns multiplying (intercept, beta, gamma) in the unfiltered residual."""
    p = spec.p
    cols = []
    if spec.include_intercept:
        cols.append(np.ones((len(w) - p, 1)))
    cols.append(_lag_matrix(w, p))
    cols.append(X[p:])
    return np.hstack(cols)


def _profile(ma, w, X, spec):
    """Solve the linear coefficients for fixed MA terms; return (coef, rss)."""
    A = _linear_block(w, X, spec)
    b = w[spec.p:]
    if spec.q:
        den = np.concatenate([[1.0], ma])
        with np.errstate(all="ignore"):
            b = lfilter([1.0], den, b)
            A = lfilter([1.0], den, A, axis=0)
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(A))):
            return None, math.inf
    if A.shape[1]:
        coef, *_ = np.linalg.lstsq(A, b, rcond=None)
        r = b - A @ coef
    else:
        coef, r = np.zeros(0), b
    rss = float(r @ r)
    return coef, (rss if math.isfinite(rss) and rss > 0 else math.inf)


def _assemble(spec, lin, ma, n_exog):
    i = 0
    intercept = 0.0
    if spec.include_intercept:
        intercept, i = float(lin[0]), 1
    ar = lin[i:i + spec.p]
    gamma = lin[i + spec.p:]
    assert len(gamma) == n_exog
    return pack_params(spec, intercept, ar, np.asarray(ma, float), gamma)


def _invertible_ma(u: np.ndarray) -> np.ndarray:
    """Map unconstrained values to MA coefficients with all roots beyond MA_ROOT_RADIUS.

    tanh gives partial autocorrelations in (-1, 1) and the Durbin-Levinson
    recursion turns them into a polynomial with roots outside the unit
    circle; shrinking coefficient j by radius**j pushes every root out by
    the radius.
    """
    r = np.tanh(u)
    a = np.zeros(0)
    for k, rk in enumerate(r):
        a = np.concatenate([a - rk * a[::-1], [rk]]) if k else np.array([rk])
    return -a / MA_ROOT_RADIUS ** np.arange(1, len(a) + 1)


def _invertible_ma_inverse(theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    a = -theta * MA_ROOT_RADIUS ** np.arange(1, len(theta) + 1)
    r = np.zeros(len(a))
    for k in range(len(a) - 1, -1, -1):
        rk = a[k]
        if abs(rk) >= 1.0:
            raise ValueError("MA polynomial is outside the admissible region")
        r[k] = rk
        a = (a[:k] + rk * a[:k][::-1]) / (1.0 - rk * rk)
    return np.arctanh(r)


def _root_warnings(ar, ma) -> tuple:
    out = []
    if len(ar):
        roots = np.roots(np.concatenate([-ar[::-1], [1.0]]))
        if np.any(np.abs(roots) <= 1.0):
            out.append("AR polynomial has roots on or inside the unit circle (non-stationary)")
    if len(ma):
        roots = np.roots(np.concatenate([ma[::-1], [1.0]]))
        if np.any(np.abs(roots) <= 1.0):
            out.append("MA polynomial has roots on or inside the unit circle (non-invertible)")
    return tuple(out)


def fit_arima(train, exog=None, spec: ArimaSpec = ArimaSpec(), max_iter: int | None = None) -> ArimaFit:
    """Fit ``spec`` to ``train`` (levels) with row-aligned ``exog``.

    With ``d > 0`` the regressors paired with the differenced series are
    ``exog[d:]``.
    """
    y = np.asarray(train, dtype=float)
    X_full = _exog_matrix(exog, len(y))
    p, d, q = spec.order
    if len(y) <= 10 * (p + q + 1):
        raise SeriesLengthError(f"ARIMA{spec.order} needs more than {10 * (p + q + 1)} observations")
    anchors = np.array([difference(y, k)[-1] for k in range(d)])
    w = difference(y, d)
    X = X_full[d:]

    converged, message = True, ""
    if q == 0:
        ma = np.zeros(0)
        lin, _ = _profile(ma, w, X, spec)
    else:
        n_eff = len(w) - p

        def objective(u):
            _, rss = _profile(_invertible_ma(u), w, X, spec)
            return 0.5 * n_eff * math.log(rss) if math.isfinite(rss) else math.inf

        # invertibility is enforced, so the simplex cannot drift onto the
        # flat non-invertible ridges of over-parameterised models
        opts = {"xatol": 1e-3, "fatol": 1e-9, "maxiter": max_iter or 1000 * q, "adaptive": True}
        start = _invertible_ma_inverse(np.full(q, 0.1))
        res = minimize(objective, start, method="Nelder-Mead", options=opts)
        # never end worse than the nested pure-AR model
        if objective(np.zeros(q)) < res.fun:
            res = minimize(objective, np.zeros(q), method="Nelder-Mead", options=opts)
        ma = _invertible_ma(np.asarray(res.x, float))
        converged, message = bool(res.success), str(res.message)
        lin, _ = _profile(ma, w, X, spec)
        if lin is None:
            raise ConvergenceError(f"ARIMA{spec.order}: MA filter diverged")

    params = _assemble(spec, lin, ma, X.shape[1])
    nll = css_negative_loglik(params, w, X, spec)
    intercept, ar, ma, gamma = unpack_params(params, spec, X.shape[1])
    eps = _residuals(params, w, X, spec)
    k = spec.n_params(X.shape[1]) + 1
    m = max(p, q)
    # residuals only exist from index p; pad the presample with zeros
    full_eps = np.concatenate([np.zeros(p), eps])
    fit = ArimaFit(
        spec=spec,
        intercept=intercept,
        ar_coefficients=ar.copy(),
        ma_coefficients=ma.copy(),
        exog_coefficients=gamma.copy(),
        innovation_variance=float(eps @ eps) / len(eps),
        log_likelihood=-nll,
        aic=2 * k + 2 * nll,
        residuals=eps,
        tail_levels=w[len(w) - m:].copy() if m else np.zeros(0),
        tail_residuals=full_eps[len(full_eps) - m:].copy() if m else np.zeros(0),
        undiff_anchors=anchors,
        warnings=_root_warnings(ar, ma),
    )
    for msg in fit.warnings:
        warnings.warn(f"ARIMA{spec.order}: {msg}", RuntimeWarning, stacklevel=2)
    if not converged:
        raise ConvergenceError(f"ARIMA{spec.order} did not converge: {message}", best=fit)
    return fit


def forecast_arima(fit: ArimaFit, horizon: int, exog_future=None) -> ForecastResult:
    """Iterate the recursion ``horizon`` steps with future shocks set to zero."""
    X = _exog_matrix(exog_future, horizon) if exog_future is not None else np.zeros((horizon, 0))
    if X.shape[1] != fit.n_exog:
        raise FeatureMismatchError(f"model has {fit.n_exog} exog columns, got {X.shape[1]}")
    p, d, q = fit.spec.order
    m = max(p, q)
    levels = list(fit.tail_levels)
    shocks = list(fit.tail_residuals) + [0.0] * horizon
    out = np.empty(horizon)
    for h in range(horizon):
        val = fit.intercept + float(X[h] @ fit.exog_coefficients)
        for i in range(1, p + 1):
            val += fit.ar_coefficients[i - 1] * levels[m + h - i]
        for j in range(1, q + 1):
            val += fit.ma_coefficients[j - 1] * shocks[m + h - j]
        levels.append(val)
        out[h] = val
    for k in range(d - 1, -1, -1):
        out = fit.undiff_anchors[k] + np.cumsum(out)
    return ForecastResult(point=out)


def _fit_cell(args):
    train, exog, p, q, d, include_intercept, p_max = args
    spec = ArimaSpec(p, d, q, include_intercept)
    # common estimation sample: every cell sees n - d - p_max residuals,
    # otherwise the CSS likelihood favours large p
    trim = p_max - p
    y = np.asarray(train, dtype=float)[trim:]
    X = None if exog is None else _exog_matrix(exog, len(train))[trim:]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            fit = fit_arima(y, X, spec)
        return GridCell(p, q, fit.aic, "ok"), fit
    except Exception as exc:  # a failed cell is recorded, never fatal
        log.info("ARIMA(%d,%d,%d) skipped: %s", p, d, q, exc)
        return GridCell(p, q, None, f"{type(exc).__name__}: {exc}"), None


def auto_arima(train, exog=None, p_max: int = 5, q_max: int = 5, d: int = 0,
               include_intercept: bool = True, workers: int = 1) -> ArimaFit:
    """Fit every (p, q) in [0..p_max] x [0..q_max] and return the lowest-AIC fit.

    Each cell drops its first ``p_max - p`` observations so all AICs are
    computed on the same residual count. Equal AIC goes to the smaller
    p + q, then the smaller p. The returned fit's ``search`` lists every grid
    cell with its AIC or failure reason.
    """
    if p_max < 0 or q_max < 0:
        raise ValueError("p_max and q_max must be >= 0")
    jobs = [(train, exog, p, q, d, include_intercept, p_max)
            for p in range(p_max + 1) for q in range(q_max + 1)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_fit_cell, jobs))
    else:
        results = [_fit_cell(j) for j in jobs]
    cells = tuple(c for c, _ in results)
    fits = [(c, f) for c, f in results if f is not None]
    if not fits:
        raise ExhaustedSearchError("every ARIMA grid cell failed")
    best_cell, best = min(fits, key=lambda cf: (cf[1].aic, cf[0].p + cf[0].q, cf[0].p))
    return replace(best, search=cells)
