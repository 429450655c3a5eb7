"""Parameter update rules: plain SGD and Adam.

Both operate on lists of numpy arrays and take the learning rate as an
external scalar each call, so an epoch-level scheduler can swap the rate
without touching Adam's moment estimates.
"""

from dataclasses import dataclass
from typing import List

import numpy as np


def _validate(params, grads, alpha):
    if len(params) != len(grads):
        raise ValueError(f"{len(params)} parameter arrays vs {len(grads)} gradients")
    if not alpha > 0.0:
        raise ValueError(f"learning rate must be positive, got {alpha}")
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ValueError(f"parameter {i}: shape {p.shape} vs gradient {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError(f"parameter {i}: gradient contains non-finite values")


def sgd_step(params, grads, alpha):
    """theta <- theta - alpha * g, elementwise."""
    _validate(params, grads, alpha)
    return [p - alpha * g for p, g in zip(params, grads)]


@dataclass
class AdamState:
    m: List[np.ndarray]
    v: List[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def init(cls, params, beta1=0.9, beta2=0.999, eps=1e-8):
        if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0 and eps > 0.0):
            raise ValueError("need 0 <= beta1, beta2 < 1 and eps > 0")
        return cls(m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params],
                   t=0, beta1=beta1, beta2=beta2, eps=eps)


def adam_step(params, grads, state, alpha):
    """Bias-corrected Adam with an externally scheduled step size."""
    _validate(params, grads, alpha)
    t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    new_m, new_v, new_p = [], [], []
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        new_m.append(m)
        new_v.append(v)
        new_p.append(p - alpha * (m / c1) / (np.sqrt(v / c2) + state.eps))
    return new_p, AdamState(m=new_m, v=new_v, t=t,
                            beta1=b1, beta2=b2, eps=state.eps)
