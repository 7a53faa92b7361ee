"""Layer vocabulary: specs, shape inference, forward/backward rules.

Five layer kinds cover every architecture in the toolkit: conv2d, dense,
relu, maxpool2d, flatten. Activations are NHWC float32 (float64 supported
for oracle work); conv weights are (kh, kw, c_in, c_out), dense weights
(d_in, d_out).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import kernels


class ShapeError(ValueError):
    """Layer/input shape incompatibility, reported with the offending layer."""


@dataclass(frozen=True)
class Conv2d:
    in_channels: int
    out_channels: int
    kernel_size: int
    stride: int = 1
    padding: int = 0
    kind = "conv2d"


@dataclass(frozen=True)
class Dense:
    in_features: int
    out_features: int
    kind = "dense"


@dataclass(frozen=True)
class ReLU:
    kind = "relu"


@dataclass(frozen=True)
class MaxPool2d:
    size: int
    stride: int = 0  # 0 means "same as size"
    kind = "maxpool2d"

    @property
    def effective_stride(self) -> int:
        return self.stride or self.size


@dataclass(frozen=True)
class Flatten:
    kind = "flatten"


LAYER_KINDS = {"conv2d": Conv2d, "dense": Dense, "relu": ReLU,
               "maxpool2d": MaxPool2d, "flatten": Flatten}


def output_shape(layer, in_shape: tuple) -> tuple:
    """Static per-sample output shape; raises ShapeError on mismatch."""
    if isinstance(layer, Conv2d):
        if len(in_shape) != 3:
            raise ShapeError(f"conv2d expects HWC input, got {in_shape}")
        h, w, c = in_shape
        if c != layer.in_channels:
            raise ShapeError(f"conv2d expects {layer.in_channels} channels, got {c}")
        k, s, p = layer.kernel_size, layer.stride, layer.padding
        oh = (h + 2 * p - k) // s + 1
        ow = (w + 2 * p - k) // s + 1
        if h + 2 * p < k or w + 2 * p < k:
            raise ShapeError(f"conv2d kernel {k} larger than padded input {in_shape}")
        return (oh, ow, layer.out_channels)
    if isinstance(layer, MaxPool2d):
        if len(in_shape) != 3:
            raise ShapeError(f"maxpool2d expects HWC input, got {in_shape}")
        h, w, c = in_shape
        q, s = layer.size, layer.effective_stride
        if h < q or w < q:
            raise ShapeError(f"maxpool2d window {q} larger than input {in_shape}")
        return ((h - q) // s + 1, (w - q) // s + 1, c)
    if isinstance(layer, Flatten):
        return (int(np.prod(in_shape)),)
    if isinstance(layer, Dense):
        if len(in_shape) != 1:
            raise ShapeError(f"dense expects flattened input, got {in_shape}")
        if in_shape[0] != layer.in_features:
            raise ShapeError(f"dense expects {layer.in_features} features, got {in_shape[0]}")
        return (layer.out_features,)
    if isinstance(layer, ReLU):
        return in_shape
    raise ShapeError(f"unknown layer {layer!r}")


def param_shapes(layer) -> dict:
    if isinstance(layer, Conv2d):
        k = layer.kernel_size
        return {"weight": (k, k, layer.in_channels, layer.out_channels),
                "bias": (layer.out_channels,)}
    if isinstance(layer, Dense):
        return {"weight": (layer.in_features, layer.out_features),
                "bias": (layer.out_features,)}
    return {}


def init_params(layer, rng: np.random.Generator, dtype=np.float32) -> dict:
    """He-normal weights, zero biases."""
    shapes = param_shapes(layer)
    if not shapes:
        return {}
    wshape = shapes["weight"]
    fan_in = int(np.prod(wshape[:-1]))
    std = np.sqrt(2.0 / fan_in)
    return {
        "weight": (rng.standard_normal(wshape) * std).astype(dtype),
        "bias": np.zeros(shapes["bias"], dtype=dtype),
    }


def forward(layer, params, x):
    """Returns (output, cache); cache holds what backward needs."""
    if isinstance(layer, Conv2d):
        y = kernels.conv2d_forward(x, params["weight"], params["bias"],
                                   layer.stride, layer.padding)
        return y, x
    if isinstance(layer, Dense):
        return x @ params["weight"] + params["bias"], x
    if isinstance(layer, ReLU):
        mask = x > 0
        return x * mask, mask
    if isinstance(layer, MaxPool2d):
        y, idx = kernels.maxpool_forward(x, layer.size, layer.effective_stride)
        return y, (idx, x.shape)
    if isinstance(layer, Flatten):
        return x.reshape(x.shape[0], -1), x.shape
    raise ShapeError(f"unknown layer {layer!r}")


def backward(layer, params, cache, dout, need_param_grads: bool,
             need_input: bool = True):
    """Returns (dinput, param_grads or None).

    dout's batch may exceed the cached batch (which must then be 1); the
    cached mask/indices broadcast. Param grads are only defined when the
    batches match. ``need_input=False`` (first layer during training)
    skips the input gradient and returns dinput=None.
    """
    if isinstance(layer, Conv2d):
        dout = np.ascontiguousarray(dout)
        dx = None
        if need_input:
            dx = kernels.conv2d_backward_input(dout, params["weight"], cache.shape,
                                               layer.stride, layer.padding)
        grads = None
        if need_param_grads:
            dw, db = kernels.conv2d_backward_params(
                dout, cache, params["weight"].shape, layer.stride, layer.padding)
            grads = {"weight": dw, "bias": db}
        return dx, grads
    if isinstance(layer, Dense):
        dx = dout @ params["weight"].T if need_input else None
        grads = None
        if need_param_grads:
            grads = {"weight": cache.T @ dout, "bias": dout.sum(axis=0)}
        return dx, grads
    if isinstance(layer, ReLU):
        return dout * cache, None
    if isinstance(layer, MaxPool2d):
        idx, x_shape = cache
        dout = np.ascontiguousarray(dout)
        dx = kernels.maxpool_backward(dout, idx, x_shape, layer.size,
                                      layer.effective_stride)
        return dx, None
    if isinstance(layer, Flatten):
        return dout.reshape((dout.shape[0],) + cache[1:]), None
    raise ShapeError(f"unknown layer {layer!r}")
