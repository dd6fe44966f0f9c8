"""Reconstruction error metrics and the pairwise orthogonality vector."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ShapeError


@dataclass(frozen=True)
class MetricsReport:
    mae: float
    mse: float
    psnr: float


def _pair(v, vhat):
    v = np.asarray(v, dtype=np.float64)
    vhat = np.asarray(vhat, dtype=np.float64)
    if v.shape != vhat.shape:
        raise ShapeError(f"shape mismatch: {v.shape} vs {vhat.shape}")
    if v.size == 0:
        raise ShapeError("cannot compare empty arrays")
    return v, vhat


def mae(v, vhat):
    """Mean absolute difference over every element."""
    v, vhat = _pair(v, vhat)
    return float(np.abs(v - vhat).sum() / v.size)


def mse(v, vhat):
    """Mean squared difference over every element.

    Differences below about 1e-162 square to zero in double precision.
    """
    v, vhat = _pair(v, vhat)
    d = v - vhat
    return float((d * d).sum() / v.size)


def psnr(v, vhat):
    """Peak signal-to-noise ratio in dB.

    The peak is ``max|v|`` of the *first* argument, so this is not symmetric.
    Returns ``inf`` for an exact match.
    """
    err = mse(v, vhat)
    if err == 0.0:
        return math.inf
    peak = float(np.abs(np.asarray(v, dtype=np.float64)).max())
    if peak == 0.0:
        return -math.inf
    return float(10.0 * np.log10(peak * peak / err))


def metrics(v, vhat):
    """MAE, MSE and PSNR of ``vhat`` as an approximation of ``v``."""
    return MetricsReport(mae(v, vhat), mse(v, vhat), psnr(v, vhat))


def po(u):
    """Inner products of every pair of columns (or blocks) ``n < m``.

    Ordered with ``n`` as the outer loop and ``m`` as the inner one; length
    ``N(N-1)/2``.  Blocks use the Frobenius inner product.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim not in (2, 3):
        raise ShapeError(f"expected a 2-D or 3-D array, got shape {u.shape}")
    n_vec = u.shape[-1]
    flat = np.ascontiguousarray(np.moveaxis(u, -1, 0).reshape(n_vec, -1))
    out = np.empty(n_vec * (n_vec - 1) // 2)
    k = 0
    for n in range(n_vec - 1):
        for m in range(n + 1, n_vec):
            out[k] = np.dot(flat[n], flat[m])
            k += 1
    return out


def max_abs_po(u):
    """``max |po(u)|``, or 0 for a single column."""
    w = po(u)
    return float(np.abs(w).max()) if w.size else 0.0
