"""Classification losses with mean-over-batch reduction.

Loss values are accumulated in float64 (the scalar is cheap and oracle
comparisons need the precision); gradients keep the logits dtype.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SoftmaxCrossEntropy:
    kind = "softmax-cross-entropy"


@dataclass(frozen=True)
class BinaryCrossEntropy:
    kind = "binary-cross-entropy"


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loss_and_dlogits(loss, logits: np.ndarray, labels) -> tuple[float, np.ndarray]:
    """Returns (scalar loss, d(loss)/d(logits))."""
    n = logits.shape[0]
    if isinstance(loss, SoftmaxCrossEntropy):
        labels = np.asarray(labels)
        if labels.min() < 0 or labels.max() >= logits.shape[1]:
            raise ValueError(f"labels outside [0, {logits.shape[1]})")
        z = logits.astype(np.float64)
        z -= z.max(axis=1, keepdims=True)
        lse = np.log(np.exp(z).sum(axis=1))
        value = float(np.mean(lse - z[np.arange(n), labels]))
        p = softmax(logits)
        d = p.astype(logits.dtype)
        d[np.arange(n), labels] -= 1
        return value, d / n
    if isinstance(loss, BinaryCrossEntropy):
        if logits.ndim != 2 or logits.shape[1] != 1:
            raise ValueError("binary-cross-entropy applies to a single sigmoid output")
        y = np.asarray(labels, dtype=np.float64).reshape(n)
        z = logits.astype(np.float64).reshape(n)
        # mean(softplus(z) - y*z), stable form
        value = float(np.mean(np.maximum(z, 0) - y * z + np.log1p(np.exp(-np.abs(z)))))
        d = (sigmoid(logits.reshape(n).astype(np.float64)) - y) / n
        return value, d.reshape(n, 1).astype(logits.dtype)
    raise TypeError(f"unknown loss {loss!r}")
