# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled conv/pool kernels (NHWC activations, HWIO conv weights).

Same contract as _kernels_py. Kernel-offset loops are outermost so the
active weight slice stays in L1; inner loops are contiguous-axis SAXPYs
that gcc auto-vectorizes.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

NAME = "compiled"

ctypedef fused real:
    float
    double


cdef inline Py_ssize_t _lo(Py_ssize_t k, Py_ssize_t pad, Py_ssize_t stride) nogil:
    # smallest output index with k + out*stride - pad >= 0
    if pad <= k:
        return 0
    return (pad - k + stride - 1) // stride


cdef inline Py_ssize_t _hi(Py_ssize_t k, Py_ssize_t pad, Py_ssize_t stride,
                           Py_ssize_t extent, Py_ssize_t limit) nogil:
    # one past the largest output index with k + out*stride - pad < extent
    cdef Py_ssize_t hi = (extent - 1 - k + pad) // stride + 1
    return hi if hi < limit else limit


def conv2d_forward(real[:, :, :, ::1] x, real[:, :, :, ::1] w, real[::1] b,
                   int stride, int pad):
    cdef Py_ssize_t n = x.shape[0], h = x.shape[1], wd = x.shape[2], c = x.shape[3]
    cdef Py_ssize_t kh = w.shape[0], kw = w.shape[1], f = w.shape[3]
    cdef Py_ssize_t oh = (h + 2 * pad - kh) // stride + 1
    cdef Py_ssize_t ow = (wd + 2 * pad - kw) // stride + 1
    dtype = np.float32 if real is float else np.float64
    out_arr = np.empty((n, oh, ow, f), dtype=dtype)
    cdef real[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t i, r, q, ki, kj, ih, iw, cc, ff, rlo, rhi, qlo, qhi
    cdef real xv
    with nogil:
        for i in range(n):
            for r in range(oh):
                for q in range(ow):
                    for ff in range(f):
                        out[i, r, q, ff] = b[ff]
        for ki in range(kh):
            rlo = _lo(ki, pad, stride)
            rhi = _hi(ki, pad, stride, h, oh)
            for kj in range(kw):
                qlo = _lo(kj, pad, stride)
                qhi = _hi(kj, pad, stride, wd, ow)
                for i in range(n):
                    for r in range(rlo, rhi):
                        ih = r * stride + ki - pad
                        for q in range(qlo, qhi):
                            iw = q * stride + kj - pad
                            for cc in range(c):
                                xv = x[i, ih, iw, cc]
                                for ff in range(f):
                                    out[i, r, q, ff] += xv * w[ki, kj, cc, ff]
    return out_arr


def conv2d_backward_input(real[:, :, :, ::1] dout, real[:, :, :, ::1] w,
                          x_shape, int stride, int pad):
    cdef Py_ssize_t n2 = dout.shape[0], oh = dout.shape[1], ow = dout.shape[2], f = dout.shape[3]
    cdef Py_ssize_t kh = w.shape[0], kw = w.shape[1], c = w.shape[2]
    cdef Py_ssize_t h = x_shape[1], wd = x_shape[2]
    dtype = np.float32 if real is float else np.float64
    dx_arr = np.zeros((n2, h, wd, c), dtype=dtype)
    # (kh, kw, f, c) layout keeps the channel axis contiguous below
    wt_arr = np.ascontiguousarray(np.transpose(np.asarray(w), (0, 1, 3, 2)))
    cdef real[:, :, :, ::1] dx = dx_arr
    cdef real[:, :, :, ::1] wt = wt_arr
    cdef Py_ssize_t i, r, q, ki, kj, ih, iw, cc, ff, rlo, rhi, qlo, qhi
    cdef real dv
    with nogil:
        for ki in range(kh):
            rlo = _lo(ki, pad, stride)
            rhi = _hi(ki, pad, stride, h, oh)
            for kj in range(kw):
                qlo = _lo(kj, pad, stride)
                qhi = _hi(kj, pad, stride, wd, ow)
                for i in range(n2):
                    for r in range(rlo, rhi):
                        ih = r * stride + ki - pad
                        for q in range(qlo, qhi):
                            iw = q * stride + kj - pad
                            for ff in range(f):
                                dv = dout[i, r, q, ff]
                                for cc in range(c):
                                    dx[i, ih, iw, cc] += dv * wt[ki, kj, ff, cc]
    return dx_arr


def conv2d_backward_params(real[:, :, :, ::1] dout, real[:, :, :, ::1] x,
                           w_shape, int stride, int pad):
    cdef Py_ssize_t n = dout.shape[0], oh = dout.shape[1], ow = dout.shape[2], f = dout.shape[3]
    cdef Py_ssize_t kh = w_shape[0], kw = w_shape[1], c = w_shape[2]
    cdef Py_ssize_t h = x.shape[1], wd = x.shape[2]
    dtype = np.float32 if real is float else np.float64
    dw_arr = np.zeros((kh, kw, c, f), dtype=dtype)
    db_arr = np.zeros(f, dtype=dtype)
    cdef real[:, :, :, ::1] dw = dw_arr
    cdef real[::1] db = db_arr
    cdef Py_ssize_t i, r, q, ki, kj, ih, iw, cc, ff, rlo, rhi, qlo, qhi
    cdef real xv
    with nogil:
        for i in range(n):
            for r in range(oh):
                for q in range(ow):
                    for ff in range(f):
                        db[ff] += dout[i, r, q, ff]
        for ki in range(kh):
            rlo = _lo(ki, pad, stride)
            rhi = _hi(ki, pad, stride, h, oh)
            for kj in range(kw):
                qlo = _lo(kj, pad, stride)
                qhi = _hi(kj, pad, stride, wd, ow)
                for i in range(n):
                    for r in range(rlo, rhi):
                        ih = r * stride + ki - pad
                        for q in range(qlo, qhi):
                            iw = q * stride + kj - pad
                            for cc in range(c):
                                xv = x[i, ih, iw, cc]
                                for ff in range(f):
                                    dw[ki, kj, cc, ff] += xv * dout[i, r, q, ff]
    return dw_arr, db_arr


def maxpool_forward(real[:, :, :, ::1] x, int size, int stride):
    cdef Py_ssize_t n = x.shape[0], h = x.shape[1], w = x.shape[2], c = x.shape[3]
    cdef Py_ssize_t oh = (h - size) // stride + 1
    cdef Py_ssize_t ow = (w - size) // stride + 1
    dtype = np.float32 if real is float else np.float64
    out_arr = np.empty((n, oh, ow, c), dtype=dtype)
    idx_arr = np.empty((n, oh, ow, c), dtype=np.int64)
    cdef real[:, :, :, ::1] out = out_arr
    cdef cnp.int64_t[:, :, :, ::1] idx = idx_arr
    cdef Py_ssize_t i, r, q, cc, pi, pj, ih, iw, bi
    cdef real best, v
    with nogil:
        for i in range(n):
            for r in range(oh):
                for q in range(ow):
                    for cc in range(c):
                        best = x[i, r * stride, q * stride, cc]
                        bi = (r * stride) * w + q * stride
                        for pi in range(size):
                            ih = r * stride + pi
                            for pj in range(size):
                                iw = q * stride + pj
                                v = x[i, ih, iw, cc]
                                if v > best:
                                    best = v
                                    bi = ih * w + iw
                        out[i, r, q, cc] = best
                        idx[i, r, q, cc] = bi
    return out_arr, idx_arr


def maxpool_backward(real[:, :, :, ::1] dout, cnp.int64_t[:, :, :, ::1] idx,
                     x_shape, int size, int stride):
    cdef Py_ssize_t n2 = dout.shape[0], oh = dout.shape[1], ow = dout.shape[2], c = dout.shape[3]
    cdef Py_ssize_t h = x_shape[1], w = x_shape[2]
    cdef Py_ssize_t ni = idx.shape[0]
    dtype = np.float32 if real is float else np.float64
    dx_arr = np.zeros((n2, h, w, c), dtype=dtype)
    cdef real[:, :, :, ::1] dx = dx_arr
    cdef Py_ssize_t i, j, r, q, cc, fl
    with nogil:
        for i in range(n2):
            j = 0 if ni == 1 else i
            for r in range(oh):
                for q in range(ow):
                    for cc in range(c):
                        fl = idx[j, r, q, cc]
                        dx[i, fl // w, fl % w, cc] += dout[i, r, q, cc]
    return dx_arr
