"""NumPy implementation of the pairwise kernel primitives.

This is the fallback used when the compiled extension (``retasa._ckernels``)
is unavailable; ``retasa._backend`` selects between the two at import time.
Both implementations share the contract below and must agree to ~1e-12:

* ``*_nw_matrix(queries, points, h)`` returns the (nq, n) matrix whose row i
  holds the kernel weights of ``queries[i]`` over ``points``, normalized to
  sum to one (a probability simplex per row).
* ``*_kde_values(queries, points, h)`` returns the (nq,) product-kernel
  density estimate (n * h**d)**-1 * sum_i prod_k K((q_k - p_ik) / h).

Inputs are C-contiguous float64 arrays of shape (nq, d) and (n, d).
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

_GAUSS_NORM = 1.0 / np.sqrt(2.0 * np.pi)


def gaussian_nw_matrix(queries: np.ndarray, points: np.ndarray, h: float) -> np.ndarray:
    d2 = cdist(queries, points, "sqeuclidean")
    # Subtracting the row minimum cancels in the ratio and keeps exp() from
    # underflowing to an all-zero row for queries far from every point.
    d2 -= d2.min(axis=1, keepdims=True)
    w = np.exp(d2 / (-2.0 * h * h))
    w /= w.sum(axis=1, keepdims=True)
    return w


def epanechnikov_nw_matrix(queries: np.ndarray, points: np.ndarray, h: float) -> np.ndarray:
    w = _epanechnikov_products(queries, points, h)
    s = w.sum(axis=1, keepdims=True)
    if np.any(s == 0.0):
        raise ValueError(
            "all kernel weights are zero for at least one query point; "
            "the query lies outside the support of every kernel"
        )
    return w / s


def gaussian_kde_values(queries: np.ndarray, points: np.ndarray, h: float) -> np.ndarray:
    n, d = points.shape
    d2 = cdist(queries, points, "sqeuclidean")
    vals = np.exp(d2 / (-2.0 * h * h)).sum(axis=1)
    return vals * (_GAUSS_NORM**d / (n * h**d))


def epanechnikov_kde_values(queries: np.ndarray, points: np.ndarray, h: float) -> np.ndarray:
    n, d = points.shape
    vals = _epanechnikov_products(queries, points, h).sum(axis=1)
    return vals / (n * h**d)


def _epanechnikov_products(queries: np.ndarray, points: np.ndarray, h: float) -> np.ndarray:
    u = (queries[:, None, :] - points[None, :, :]) / h
    return np.prod(np.maximum(0.75 * (1.0 - u * u), 0.0), axis=2)
