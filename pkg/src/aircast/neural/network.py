"""The two regression architectures, their training loop and prediction.

lstm : LSTM(units, activation) -> last hidden state -> Dense(1)
cnn1d: Conv1D(filters, kernel, relu) -> MaxPool1D(pool) -> Flatten
       -> Dense(dense_hidden, relu) -> Dense(1)

Trained on MAE with Adam. Parameters live in a flat dict keyed
``"<layer>.<name>"``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from ..dataset import ScalerState, invert_minmax
from ..errors import ConfigError, DivergenceError, ShapeError, StateMismatchError
from . import layers as L
from .optim import AdamState, adam_step, mae_loss

KINDS = ("lstm", "cnn1d")


@dataclass(frozen=True)
class NetworkSpec:
    kind: str = "lstm"
    lstm_units: int = 128
    lstm_activation: str = "tanh"
    conv_filters: int = 128
    conv_kernel: int = 2
    pool_size: int = 2
    dense_hidden: int = 64
    lookback: int = 1
    seed: int = 0
    batch_size: int = 32
    epochs: int = 200
    learning_rate: float = 0.001
    forget_bias: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.lstm_activation not in ("tanh", "relu"):
            raise ConfigError("lstm_activation must be 'tanh' or 'relu'")
        counts = (self.lstm_units, self.conv_filters, self.conv_kernel, self.pool_size,
                  self.dense_hidden, self.lookback, self.batch_size, self.epochs)
        if min(counts) < 1:
            raise ConfigError("all network counts must be >= 1")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class NetworkFit:
    spec: NetworkSpec
    params: dict
    input_shape: tuple  # (sequence length, channels) of one sample
    train_loss_history: np.ndarray
    validation_loss_history: np.ndarray
    target_scaler: ScalerState | None = None
    feature_scaler: ScalerState | None = None
    clip_events: int = 0

    @property
    def final_validation_loss(self) -> float:
        h = self.validation_loss_history
        return float(h[-1]) if len(h) else math.nan


# -- data layout ------------------------------------------------------------------

def make_windows(features, target=None, lookback: int = 1, kind: str = "lstm"):
    """Arrange day rows into model samples.

    Sample t sees feature rows t-lookback+1 .. t and predicts target t, so
    the first ``lookback - 1`` days are dropped. For ``cnn1d`` with
    lookback 1 the feature vector itself becomes the sequence axis (one
    channel); otherwise the window is the sequence axis and features are
    channels.
    """
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, F = X.shape
    if n < lookback:
        raise ShapeError(f"{n} rows cannot form a window of {lookback}")
    windows = np.stack([X[t - lookback + 1:t + 1] for t in range(lookback - 1, n)])
    if kind == "cnn1d" and lookback == 1:
        windows = windows.reshape(len(windows), F, 1)
    y = None if target is None else np.asarray(target, dtype=float)[lookback - 1:]
    return windows, y


# -- parameters -----------------------------------------------------------------

def _glorot(rng, shape, fan_in, fan_out):
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(spec: NetworkSpec, input_shape) -> dict:
    """Seeded Glorot-uniform weights, zero biases, forget-gate bias ``spec.forget_bias``."""
    rng = np.random.default_rng(spec.seed)
    T, F = input_shape
    p = {}
    if spec.kind == "lstm":
        n = spec.lstm_units
        p["lstm.W"] = _glorot(rng, (F, 4 * n), F, 4 * n)
        p["lstm.U"] = _glorot(rng, (n, 4 * n), n, 4 * n)
        b = np.zeros(4 * n)
        b[n:2 * n] = spec.forget_bias
        p["lstm.b"] = b
        p["out.W"] = _glorot(rng, (n, 1), n, 1)
        p["out.b"] = np.zeros(1)
    else:
        k, nf = spec.conv_kernel, spec.conv_filters
        conv_len = T - k + 1
        pooled = conv_len // spec.pool_size
        if conv_len < 1 or pooled < 1:
            raise ShapeError(
                f"sequence length {T} too short for kernel {k} and pool {spec.pool_size}"
            )
        p["conv.W"] = _glorot(rng, (k, F, nf), k * F, k * nf)
        p["conv.b"] = np.zeros(nf)
        flat = pooled * nf
        p["hidden.W"] = _glorot(rng, (flat, spec.dense_hidden), flat, spec.dense_hidden)
        p["hidden.b"] = np.zeros(spec.dense_hidden)
        p["out.W"] = _glorot(rng, (spec.dense_hidden, 1), spec.dense_hidden, 1)
        p["out.b"] = np.zeros(1)
    return p


def _sub(params, layer):
    prefix = layer + "."
    return {k[len(prefix):]: v for k, v in params.items() if k.startswith(prefix)}


# -- forward / backward -----------------------------------------------------------

def forward(spec: NetworkSpec, params: dict, x):
    """Batch forward pass: x [B, T, F] -> predictions [B], cache."""
    if spec.kind == "lstm":
        hs, c_lstm = L.lstm_forward(_sub(params, "lstm"), x, spec.lstm_activation)
        last = hs[:, -1]
        y, c_out = L.dense_forward(_sub(params, "out"), last)
        return y[:, 0], {"lstm": c_lstm, "out": c_out, "T": x.shape[1], "units": last.shape[1]}
    z, c_conv = L.conv1d_forward(_sub(params, "conv"), x)
    a = L.relu(z)
    pooled, c_pool = L.maxpool1d_forward(a, spec.pool_size)
    flat, c_flat = L.flatten_forward(pooled)
    zh, c_hidden = L.dense_forward(_sub(params, "hidden"), flat)
    ah = L.relu(zh)
    y, c_out = L.dense_forward(_sub(params, "out"), ah)
    cache = {"conv": c_conv, "z": z, "pool": c_pool, "flat": c_flat,
             "hidden": c_hidden, "zh": zh, "out": c_out}
    return y[:, 0], cache


def backward(spec: NetworkSpec, params: dict, dy, cache):
    """Gradients of a scalar loss given dloss/dprediction ``dy`` [B]."""
    grads = {}
    dy = dy[:, None]
    if spec.kind == "lstm":
        dlast, g = L.dense_backward(_sub(params, "out"), dy, cache["out"])
        grads.update({f"out.{k}": v for k, v in g.items()})
        B = dy.shape[0]
        dhs = np.zeros((B, cache["T"], cache["units"]))
        dhs[:, -1] = dlast
        dx, g = L.lstm_backward(_sub(params, "lstm"), dhs, cache["lstm"])
        grads.update({f"lstm.{k}": v for k, v in g.items()})
        return dx, grads
    dah, g = L.dense_backward(_sub(params, "out"), dy, cache["out"])
    grads.update({f"out.{k}": v for k, v in g.items()})
    dzh = L.relu_backward(dah, cache["zh"])
    dflat, g = L.dense_backward(_sub(params, "hidden"), dzh, cache["hidden"])
    grads.update({f"hidden.{k}": v for k, v in g.items()})
    dpooled = L.flatten_backward(dflat, cache["flat"])
    da = L.maxpool1d_backward(dpooled, cache["pool"])
    dz = L.relu_backward(da, cache["z"])
    dx, g = L.conv1d_backward(_sub(params, "conv"), dz, cache["conv"])
    grads.update({f"conv.{k}": v for k, v in g.items()})
    return dx, grads


# -- training -------------------------------------------------------------------------

def _epoch_order(seed: int, epoch: int, n: int) -> np.ndarray:
    # depends only on (seed, epoch) so a long run passes through exactly the
    # states of every shorter run with the same seed
    return np.random.default_rng([seed, epoch]).permutation(n)


def _train(spec, X, y, validation, snapshot_epochs):
    params = init_params(spec, X.shape[1:])
    state = AdamState(lr=spec.learning_rate)
    train_hist, val_hist = [], []
    clipped = 0
    snaps = {}
    n = len(X)
    last_epoch = max(snapshot_epochs)
    for epoch in range(1, last_epoch + 1):
        order = _epoch_order(spec.seed, epoch, n)
        total = 0.0
        for bi, start in enumerate(range(0, n, spec.batch_size)):
            idx = order[start:start + spec.batch_size]
            pred, cache = forward(spec, params, X[idx])
            loss, dpred = mae_loss(pred, y[idx])
            if not math.isfinite(loss):
                raise DivergenceError(epoch, bi)
            if spec.kind == "lstm":
                clipped += cache["lstm"]["clipped"]
            _, grads = backward(spec, params, dpred, cache)
            params, state = adam_step(state, params, grads)
            total += loss * len(idx)
        train_hist.append(total / n)
        if validation is not None:
            vpred, _ = forward(spec, params, validation[0])
            val_hist.append(mae_loss(vpred, validation[1])[0])
        if epoch in snapshot_epochs:
            snaps[epoch] = (dict(params), np.array(train_hist), np.array(val_hist), clipped)
    return snaps


def _prepare(spec, features, target, validation):
    X, y = make_windows(features, target, spec.lookback, spec.kind)
    val = None
    if validation is not None and len(validation[1]):
        val = make_windows(validation[0], validation[1], spec.lookback, spec.kind)
    return X, y, val


def build_and_train(spec: NetworkSpec, train_features, train_target, validation=None,
                    target_scaler: ScalerState | None = None,
                    feature_scaler: ScalerState | None = None) -> NetworkFit:
    """Train ``spec`` for ``spec.epochs`` epochs on scaled inputs.

    ``validation`` is an optional ``(features, target)`` pair. Training is
    deterministic for a fixed ``spec.seed``.
    """
    return train_sweep(spec, train_features, train_target, [spec.epochs], validation,
                       target_scaler, feature_scaler)[0]


def train_sweep(spec: NetworkSpec, train_features, train_target, epochs, validation=None,
                target_scaler=None, feature_scaler=None) -> list[NetworkFit]:
    """One fit per entry of ``epochs``, from a single run to the largest budget.

    Each returned fit is identical to an independent ``build_and_train``
    with that epoch count.
    """
    X, y, val = _prepare(spec, train_features, train_target, validation)
    snaps = _train(spec, X, y, val, set(epochs))
    fits = []
    for e in epochs:
        params, th, vh, clipped = snaps[e]
        fits.append(NetworkFit(
            spec=replace(spec, epochs=e),
            params=params,
            input_shape=tuple(X.shape[1:]),
            train_loss_history=th,
            validation_loss_history=vh,
            target_scaler=target_scaler,
            feature_scaler=feature_scaler,
            clip_events=clipped,
        ))
    return fits


def predict_scaled(fit: NetworkFit, features) -> np.ndarray:
    X, _ = make_windows(features, None, fit.spec.lookback, fit.spec.kind)
    if tuple(X.shape[1:]) != fit.input_shape:
        raise ShapeError(f"sample shape {X.shape[1:]} != trained shape {fit.input_shape}")
    out, _ = forward(fit.spec, fit.params, X)
    return out


def predict_network(fit: NetworkFit, features, scaler: ScalerState | None = None) -> np.ndarray:
    """Forecast in target units: forward pass, then undo the target scaling.

    ``features`` must already be scaled; pass the scaler that produced
    them as ``scaler`` to have it checked against the training one.
    """
    if scaler is not None and fit.feature_scaler is not None and scaler != fit.feature_scaler:
        raise StateMismatchError("features were scaled with a different scaler than training")
    out = predict_scaled(fit, features)
    if fit.target_scaler is None:
        return out
    return invert_minmax(fit.target_scaler, out)
