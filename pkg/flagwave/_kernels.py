# Compiled Gather Kernels
# =======================
#
# numba kernels behind grid.convolve, grid.evaluate_at and
# grid.partial_convolve_t. Every output node is owned by exactly one prange
# iteration and accumulates its terms sequentially in source order, so results
# do not depend on the thread count.
#
# Author: Yourl.Cloud Inc.

import math

import numpy as np
from numba import njit, prange


@njit(cache=True)
def _product(g, h, out, n):
    # out = g o h
    s1 = 0.0
    s2 = 0.0
    for i in range(n):
        out[i] = g[i] + h[i]
        out[n + i] = g[n + i] + h[n + i]
        s1 += g[n + i] * h[i]
        s2 += g[i] * h[n + i]
    out[2 * n] = g[2 * n] + h[2 * n] + 2.0 * s1 - 2.0 * s2


@njit(cache=True)
def _interpolate(dense, shape, strides, lo, step, target, i0, frac):
    d = target.shape[0]
    for ax in range(d):
        s = (target[ax] - lo[ax]) / step[ax]
        fl = math.floor(s)
        i0[ax] = int(fl)
        frac[ax] = s - fl
    acc = 0.0
    for corner in range(1 << d):
        weight = 1.0
        flat = 0
        for ax in range(d):
            if (corner >> ax) & 1:
                wt = frac[ax]
                idx = i0[ax] + 1
            else:
                wt = 1.0 - frac[ax]
                idx = i0[ax]
            if wt == 0.0 or idx < 0 or idx >= shape[ax]:
                weight = 0.0
                break
            weight *= wt
            flat += idx * strides[ax]
        if weight != 0.0:
            acc += weight * dense[flat]
    return acc


@njit(parallel=True, cache=True)
def gather_convolution(src_vals, src_pts, src_left, dense, shape, strides, lo, step, out_pts, n):
    """out[p] = sum_k src_vals[k] * dense(src_pts[k] o out_pts[p])   (src_left)
    out[p] = sum_k src_vals[k] * dense(out_pts[p] o src_pts[k])   (otherwise)

    Callers pass already-inverted source points; the cell volume is applied
    outside.
    """
    count = out_pts.shape[0]
    terms = src_vals.shape[0]
    d = 2 * n + 1
    out = np.zeros(count)
    for p in prange(count):
        target = np.empty(d)
        i0 = np.empty(d, np.int64)
        frac = np.empty(d)
        acc = 0.0
        for k in range(terms):
            if src_left:
                _product(src_pts[k], out_pts[p], target, n)
            else:
                _product(out_pts[p], src_pts[k], target, n)
            acc += src_vals[k] * _interpolate(dense, shape, strides, lo, step, target, i0, frac)
        out[p] = acc
    return out


@njit(parallel=True, cache=True)
def interpolate_points(dense, shape, strides, lo, step, pts):
    count = pts.shape[0]
    d = pts.shape[1]
    out = np.zeros(count)
    for p in prange(count):
        i0 = np.empty(d, np.int64)
        frac = np.empty(d)
        out[p] = _interpolate(dense, shape, strides, lo, step, pts[p], i0, frac)
    return out


@njit(parallel=True, cache=True)
def convolve_columns(columns, lag, center):
    """Direct 1-D sums out[c, i] = sum_l columns[c, l] * lag[i - l + center]."""
    rows, length = columns.shape
    out = np.zeros((rows, length))
    for c in prange(rows):
        for i in range(length):
            acc = 0.0
            for l in range(length):
                m = i - l + center
                if m >= 0 and m < length:
                    acc += columns[c, l] * lag[m]
            out[c, i] = acc
    return out
