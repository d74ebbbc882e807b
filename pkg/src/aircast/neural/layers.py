"""Forward/backward passes for dense, LSTM, 1-D convolution, max-pooling and flatten.

Every ``*_forward`` returns ``(output, cache)``; the matching ``*_backward``
takes the upstream gradient and the cache and returns the input gradient
plus a dict of parameter gradients. Batched layouts:

    dense    x [B, in]
    lstm     x [B, T, F]  -> h [B, T, units]
    conv1d   x [B, L, C]  -> y [B, L - k + 1, filters]
    maxpool  x [B, L, C]  -> y [B, L // pool, C]
"""
from __future__ import annotations

import numpy as np

from ..errors import ShapeError

CELL_CLIP = 50.0


def sigmoid(z):
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def relu(z):
    return np.maximum(z, 0.0)


def _activation(name):
    if name == "tanh":
        return np.tanh, lambda z, a: 1.0 - a * a
    if name == "relu":
        return relu, lambda z, a: (z > 0).astype(z.dtype)
    raise ValueError(f"unknown activation {name!r}")


# -- dense ------------------------------------------------------------------

def dense_forward(params, x):
    W, b = params["W"], params["b"]
    if x.shape[-1] != W.shape[0]:
        raise ShapeError(f"dense expects {W.shape[0]} inputs, got {x.shape[-1]}")
    return x @ W + b, x


def dense_backward(params, dy, cache):
    x = cache
    return dy @ params["W"].T, {"W": x.T @ dy, "b": dy.sum(axis=0)}


def relu_backward(dy, z):
    return dy * (z > 0)


# -- LSTM ---------------------------------------------------------------------

def lstm_forward(params, x, activation="tanh", clip=CELL_CLIP):
    """Single LSTM layer with zero initial state.

    Gates are ordered input, forget, output, candidate in the packed
    weights ``W`` [F, 4U], ``U`` [U, 4U] and ``b`` [4U]. The candidate and
    the output nonlinearity use ``activation``; the cell state is clipped to
    ``[-clip, clip]``. A 2-D ``x`` [T, F] is treated as one sequence.
    """
    single = x.ndim == 2
    if single:
        x = x[None]
    W, U, b = params["W"], params["U"], params["b"]
    B, T, F = x.shape
    if F != W.shape[0]:
        raise ShapeError(f"LSTM expects {W.shape[0]} input features, got {F}")
    n = U.shape[0]
    act, _ = _activation(activation)
    h = np.zeros((B, n))
    c = np.zeros((B, n))
    hs = np.empty((B, T, n))
    steps = []
    clipped = 0
    xw = x @ W + b  # input projection for all steps at once
    for t in range(T):
        z = xw[:, t] + h @ U
        i = sigmoid(z[:, :n])
        f = sigmoid(z[:, n:2 * n])
        o = sigmoid(z[:, 2 * n:3 * n])
        zg = z[:, 3 * n:]
        g = act(zg)
        c_raw = f * c + i * g
        c_new = np.clip(c_raw, -clip, clip)
        clipped += int(np.count_nonzero(c_new != c_raw))
        ac = act(c_new)
        h_new = o * ac
        steps.append((h, c, i, f, o, zg, g, c_raw, c_new, ac))
        h, c = h_new, c_new
        hs[:, t] = h
    cache = {"x": x, "steps": steps, "activation": activation, "clip": clip,
             "single": single, "clipped": clipped}
    return (hs[0] if single else hs), cache


def lstm_backward(params, dh_seq, cache):
    """Backpropagation through time. ``dh_seq`` has the shape of the forward output."""
    W, U = params["W"], params["U"]
    x = cache["x"]
    if cache["single"]:
        dh_seq = dh_seq[None]
    _, dact = _activation(cache["activation"])
    clip = cache["clip"]
    B, T, _ = x.shape
    n = U.shape[0]
    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(4 * n)
    dx = np.empty_like(x)
    dh_next = np.zeros((B, n))
    dc_next = np.zeros((B, n))
    for t in range(T - 1, -1, -1):
        h_prev, c_prev, i, f, o, zg, g, c_raw, c_new, ac = cache["steps"][t]
        dh = dh_seq[:, t] + dh_next
        do = dh * ac
        dc = dh * o * dact(c_new, ac) + dc_next
        dc = dc * (np.abs(c_raw) <= clip)
        dz = np.concatenate([
            dc * g * i * (1.0 - i),
            dc * c_prev * f * (1.0 - f),
            do * o * (1.0 - o),
            dc * i * dact(zg, g),
        ], axis=1)
        dc_next = dc * f
        dW += x[:, t].T @ dz
        dU += h_prev.T @ dz
        db += dz.sum(axis=0)
        dx[:, t] = dz @ W.T
        dh_next = dz @ U.T
    if cache["single"]:
        dx = dx[0]
    return dx, {"W": dW, "U": dU, "b": db}


# -- convolution / pooling --------------------------------------------------------

def conv1d_forward(params, x):
    """Valid cross-correlation along axis 1. ``W`` is [k, C, filters]."""
    W, b = params["W"], params["b"]
    k, C, _ = W.shape
    B, L, Cx = x.shape
    if Cx != C:
        raise ShapeError(f"conv1d expects {C} channels, got {Cx}")
    if L < k:
        raise ShapeError(f"sequence length {L} shorter than kernel {k}")
    Lo = L - k + 1
    # windows [B, Lo, k, C]
    cols = np.stack([x[:, j:j + Lo] for j in range(k)], axis=2)
    y = np.tensordot(cols, W, axes=([2, 3], [0, 1])) + b
    return y, cols


def conv1d_backward(params, dy, cache):
    W = params["W"]
    cols = cache
    k = W.shape[0]
    B, Lo, _ = dy.shape
    dW = np.tensordot(cols, dy, axes=([0, 1], [0, 1]))
    db = dy.sum(axis=(0, 1))
    dcols = np.tensordot(dy, W, axes=([2], [2]))  # [B, Lo, k, C]
    dx = np.zeros((B, Lo + k - 1, W.shape[1]))
    for j in range(k):
        dx[:, j:j + Lo] += dcols[:, :, j]
    return dx, {"W": dW, "b": db}


def maxpool1d_forward(x, pool):
    """Non-overlapping max over windows of ``pool``; a trailing remainder is dropped."""
    B, L, C = x.shape
    Lo = L // pool
    if Lo == 0:
        raise ShapeError(f"sequence length {L} shorter than pool size {pool}")
    win = x[:, :Lo * pool].reshape(B, Lo, pool, C)
    arg = win.argmax(axis=2)
    y = np.take_along_axis(win, arg[:, :, None, :], axis=2)[:, :, 0]
    return y, (x.shape, arg, pool)


def maxpool1d_backward(dy, cache):
    shape, arg, pool = cache
    B, L, C = shape
    Lo = dy.shape[1]
    dwin = np.zeros((B, Lo, pool, C))
    np.put_along_axis(dwin, arg[:, :, None, :], dy[:, :, None, :], axis=2)
    dx = np.zeros(shape)
    dx[:, :Lo * pool] = dwin.reshape(B, Lo * pool, C)
    return dx


def flatten_forward(x):
    return x.reshape(x.shape[0], -1), x.shape


def flatten_backward(dy, shape):
    return dy.reshape(shape)
