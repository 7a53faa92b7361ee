"""Adam optimizer with bias correction.

Defaults beta1=0.9, beta2=0.999, eps=1e-8. State holds first/second
moments per parameter tensor plus the shared step counter.
"""

from __future__ import annotations

import numpy as np


class AdamState:
    def __init__(self):
        self.t = 0
        self.m: dict = {}
        self.v: dict = {}


def adam_step(params, grads, state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
    """One Adam update, in place on ``params``.

    ``params``/``grads`` are nested dicts layer_index -> {name: array};
    moments are lazily zero-initialized. Returns (params, state).
    """
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    for i, group in params.items():
        if i not in grads:
            continue
        for name, p in group.items():
            g = grads[i][name]
            if g.shape != p.shape:
                raise ValueError(f"grad shape {g.shape} != param shape {p.shape} "
                                 f"for layer {i} {name}")
            key = (i, name)
            m = state.m.get(key)
            if m is None:
                m = state.m[key] = np.zeros_like(p)
                state.v[key] = np.zeros_like(p)
            v = state.v[key]
            m *= beta1
            m += (1 - beta1) * g
            v *= beta2
            v += (1 - beta2) * np.square(g)
            p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    return params, state
