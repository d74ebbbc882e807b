from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def mae_loss(prediction, target):
    """Mean absolute error and its subgradient (sign(0) = 0)."""
    pred = np.asarray(prediction, dtype=float)
    tgt = np.asarray(target, dtype=float)
    if pred.shape != tgt.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {tgt.shape}")
    diff = pred - tgt
    return float(np.mean(np.abs(diff))), np.sign(diff) / diff.size


@dataclass
class AdamState:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(state: AdamState, params: dict, grads: dict):
    """One bias-corrected Adam update; returns ``(new_params, new_state)``.

    Inputs are not modified.
    """
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    m, v, new = {}, {}, {}
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    for name, p in params.items():
        g = grads[name]
        m[name] = b1 * state.m.get(name, 0.0) + (1.0 - b1) * g
        v[name] = b2 * state.v.get(name, 0.0) + (1.0 - b2) * g * g
        new[name] = p - state.lr * (m[name] / c1) / (np.sqrt(v[name] / c2) + state.eps)
    return new, AdamState(state.lr, b1, b2, state.eps, t, m, v)
