"""Feedforward model graphs: construction, evaluation, gradients.

A ModelGraph is an ordered layer list plus a parameter store keyed by layer
index. Graphs are immutable during forward/gradient calls; training code
mutates parameters in place under exclusive access. Every engine operation
checks activations for NaN/Inf and reports the offending layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import layers as L
from .losses import loss_and_dlogits


class NonFiniteError(FloatingPointError):
    """An activation or gradient went NaN/Inf; message names the layer."""


def _check_finite(arr, where: str) -> None:
    # sum in float64 propagates both NaN and +/-Inf in one pass
    if not np.isfinite(np.sum(arr, dtype=np.float64)):
        raise NonFiniteError(f"non-finite values after {where}")


@dataclass
class ModelGraph:
    layers: list
    params: dict[int, dict[str, np.ndarray]]
    input_shape: tuple
    num_classes: int
    meta: dict = field(default_factory=dict)

    @classmethod
    def build(cls, layer_list, input_shape, rng: np.random.Generator,
              dtype=np.float32, meta: dict | None = None) -> "ModelGraph":
        shape = tuple(input_shape)
        params: dict[int, dict[str, np.ndarray]] = {}
        for i, layer in enumerate(layer_list):
            try:
                shape = L.output_shape(layer, shape)
            except L.ShapeError as exc:
                raise L.ShapeError(f"layer {i} ({layer.kind}): {exc}") from exc
            p = L.init_params(layer, rng, dtype=dtype)
            if p:
                params[i] = p
        if len(shape) != 1:
            raise L.ShapeError(f"final layer must emit a logit vector, got shape {shape}")
        return cls(list(layer_list), params, tuple(input_shape), int(shape[0]),
                   meta=dict(meta or {}))

    @property
    def output_dim(self) -> int:
        return self.num_classes

    def shape_chain(self) -> list[tuple]:
        shapes = [self.input_shape]
        for i, layer in enumerate(self.layers):
            try:
                shapes.append(L.output_shape(layer, shapes[-1]))
            except L.ShapeError as exc:
                raise L.ShapeError(f"layer {i} ({layer.kind}): {exc}") from exc
        return shapes

    def astype(self, dtype) -> "ModelGraph":
        params = {i: {k: v.astype(dtype) for k, v in p.items()}
                  for i, p in self.params.items()}
        return ModelGraph(list(self.layers), params, self.input_shape,
                          self.num_classes, meta=dict(self.meta))

    def copy(self) -> "ModelGraph":
        params = {i: {k: v.copy() for k, v in p.items()}
                  for i, p in self.params.items()}
        return ModelGraph(list(self.layers), params, self.input_shape,
                          self.num_classes, meta=dict(self.meta))

    def param_items(self):
        """Canonical (layer_index, name, array) order."""
        for i in sorted(self.params):
            for name in sorted(self.params[i]):
                yield i, name, self.params[i][name]


def _prep_batch(model: ModelGraph, batch: np.ndarray) -> np.ndarray:
    batch = np.asarray(batch)
    if batch.shape[1:] != model.input_shape:
        raise L.ShapeError(
            f"batch shape {batch.shape[1:]} does not match model input {model.input_shape}")
    if batch.dtype not in (np.float32, np.float64):
        batch = batch.astype(np.float32)
    return np.ascontiguousarray(batch)


def forward_trace(model: ModelGraph, batch: np.ndarray):
    """Full forward pass; returns (logits, per-layer caches)."""
    x = _prep_batch(model, batch)
    caches = []
    for i, layer in enumerate(model.layers):
        x, cache = L.forward(layer, model.params.get(i, {}), x)
        _check_finite(x, f"layer {i} ({layer.kind})")
        caches.append(cache)
    return x, caches


def forward(model: ModelGraph, batch: np.ndarray) -> np.ndarray:
    """Logits for a batch; deterministic and side-effect free."""
    return forward_trace(model, batch)[0]


def predict(model: ModelGraph, batch: np.ndarray) -> np.ndarray:
    return np.argmax(forward(model, batch), axis=1)


def backward(model: ModelGraph, caches, dout, need_param_grads=True,
             need_input_grad=True):
    """Vector-Jacobian product from logits gradient ``dout``.

    Returns (dinput, grads) where grads maps layer index -> {name: grad}.
    """
    grads: dict[int, dict[str, np.ndarray]] = {}
    dx = dout
    for i in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[i]
        has_params = i in model.params
        need_input = need_input_grad or i > 0
        dx, g = L.backward(layer, model.params.get(i, {}), caches[i], dx,
                           need_param_grads and has_params, need_input)
        if dx is not None:
            _check_finite(dx, f"backward of layer {i} ({layer.kind})")
        if g is not None:
            grads[i] = g
    return dx, grads


def value_and_grads(model: ModelGraph, batch, labels, loss):
    """Loss value plus parameter gradients (training step)."""
    logits, caches = forward_trace(model, batch)
    value, dlogits = loss_and_dlogits(loss, logits, labels)
    _, grads = backward(model, caches, dlogits, need_param_grads=True)
    return value, grads


def grad_params(model: ModelGraph, batch, labels, loss):
    return value_and_grads(model, batch, labels, loss)[1]


def grad_input(model: ModelGraph, batch, labels, loss) -> np.ndarray:
    """d(loss)/d(batch), same shape as batch."""
    logits, caches = forward_trace(model, batch)
    _, dlogits = loss_and_dlogits(loss, logits, labels)
    dx, _ = backward(model, caches, dlogits, need_param_grads=False)
    return dx


def input_jacobian(model: ModelGraph, x: np.ndarray):
    """Per-class input gradients for a single image.

    Returns (logits (K,), jacobian (K, *input_shape)). One forward pass;
    the backward runs all K one-hot rows at once against the cached
    batch-1 activations.
    """
    batch = x[None] if x.shape == model.input_shape else x
    if batch.shape[0] != 1:
        raise L.ShapeError("input_jacobian expects a single image")
    logits, caches = forward_trace(model, batch)
    k = model.num_classes
    eye = np.eye(k, dtype=logits.dtype)
    jac, _ = backward(model, caches, eye, need_param_grads=False)
    return logits[0], jac
