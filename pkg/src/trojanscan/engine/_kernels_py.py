"""Pure-numpy conv/pool kernels (fallback backend).

Convolutions are computed as a small loop over kernel offsets, each step a
BLAS matmul on a strided slice — no im2col buffer. Layouts: activations
NHWC, conv weights (kh, kw, c_in, c_out). The backward-input and
maxpool-backward kernels accept a gradient batch larger than the cached
activation batch (broadcast), which is how per-class input Jacobians are
computed from a single forward pass.
"""

from __future__ import annotations

import numpy as np

NAME = "python"


def conv2d_forward(x, w, b, stride, pad):
    n, h, wd, c = x.shape
    kh, kw, _, f = w.shape
    if pad:
        x = np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0)))
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (wd + 2 * pad - kw) // stride + 1
    out = np.zeros((n, oh, ow, f), dtype=x.dtype)
    out2 = out.reshape(-1, f)
    for ki in range(kh):
        for kj in range(kw):
            xs = x[:, ki:ki + oh * stride:stride, kj:kj + ow * stride:stride, :]
            out2 += xs.reshape(-1, c) @ w[ki, kj]
    out += b
    return out


def conv2d_backward_input(dout, w, x_shape, stride, pad):
    n2, oh, ow, f = dout.shape
    kh, kw, c, _ = w.shape
    h, wd = x_shape[1], x_shape[2]
    dxp = np.zeros((n2, h + 2 * pad, wd + 2 * pad, c), dtype=dout.dtype)
    d2 = dout.reshape(-1, f)
    for ki in range(kh):
        for kj in range(kw):
            g = (d2 @ w[ki, kj].T).reshape(n2, oh, ow, c)
            dxp[:, ki:ki + oh * stride:stride, kj:kj + ow * stride:stride, :] += g
    if pad:
        return np.ascontiguousarray(dxp[:, pad:pad + h, pad:pad + wd, :])
    return dxp


def conv2d_backward_params(dout, x, w_shape, stride, pad):
    kh, kw, c, f = w_shape
    _, oh, ow, _ = dout.shape
    if pad:
        x = np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0)))
    dw = np.zeros(w_shape, dtype=dout.dtype)
    d2 = dout.reshape(-1, f)
    for ki in range(kh):
        for kj in range(kw):
            xs = x[:, ki:ki + oh * stride:stride, kj:kj + ow * stride:stride, :]
            dw[ki, kj] = xs.reshape(-1, c).T @ d2
    db = dout.sum(axis=(0, 1, 2))
    return dw, db


def maxpool_forward(x, size, stride):
    n, h, w, c = x.shape
    oh = (h - size) // stride + 1
    ow = (w - size) // stride + 1
    out = np.full((n, oh, ow, c), -np.inf, dtype=x.dtype)
    idx = np.zeros((n, oh, ow, c), dtype=np.int64)
    rows = np.arange(oh) * stride
    cols = np.arange(ow) * stride
    for pi in range(size):
        for pj in range(size):
            xs = x[:, pi:pi + oh * stride:stride, pj:pj + ow * stride:stride, :]
            flat = ((rows + pi)[:, None] * w + (cols + pj)[None, :])[None, :, :, None]
            better = xs > out
            out = np.where(better, xs, out)
            idx = np.where(better, flat, idx)
    return out, idx


def maxpool_backward(dout, idx, x_shape, size, stride):
    n2, oh, ow, c = dout.shape
    h, w = x_shape[1], x_shape[2]
    dx = np.zeros((n2, h * w, c), dtype=dout.dtype)
    flat = idx.reshape(idx.shape[0], oh * ow, c)
    if flat.shape[0] == 1 and n2 > 1:
        flat = np.broadcast_to(flat, (n2, oh * ow, c))
    d2 = dout.reshape(n2, oh * ow, c)
    ni = np.arange(n2)[:, None, None]
    ci = np.arange(c)[None, None, :]
    if stride >= size:
        # non-overlapping windows: targets unique, plain fancy assignment
        dx[ni, flat, ci] = d2
    else:
        np.add.at(dx, (ni, flat, ci), d2)
    return dx.reshape(n2, h, w, c)
