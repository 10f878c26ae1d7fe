"""Scalar feature mapping z = f(x) for multivariate covariates.

KDE degrades quickly with dimension, so the pipeline reduces x to the
fitted conditional-mean scalar before any kernel work. Only the linear
least-squares mapping is built in; any user-supplied callable x -> scalar
can be plugged into the pipeline instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .kernels import as_matrix


@dataclass(frozen=True)
class LinearMap:
    coefficients: np.ndarray
    intercept: float

    def __call__(self, x):
        return apply_mapping(self, x)


def fit_mapping(source_x, source_y) -> LinearMap:
    """Ordinary least-squares fit of the response on the covariates."""
    xs = as_matrix(source_x, "source_x")
    y = np.asarray(source_y, dtype=np.float64).ravel()
    n, p = xs.shape
    if y.shape[0] != n:
        raise DataError(f"covariate/response length mismatch: {n} vs {y.shape[0]}")
    if n <= p + 1:
        raise DataError(f"mapping fit needs n > p + 1, got n={n}, p={p}")
    design = np.column_stack([np.ones(n), xs])
    beta, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < p + 1:
        raise DataError("mapping design matrix is rank deficient")
    return LinearMap(coefficients=beta[1:], intercept=float(beta[0]))


def apply_mapping(mapping: LinearMap, x):
    """Affine evaluation intercept + <coefficients, x>; accepts one point or a batch."""
    coef = np.asarray(mapping.coefficients, dtype=np.float64)
    arr = np.asarray(x, dtype=np.float64)
    p = coef.shape[0]
    if arr.ndim == 0:
        if p != 1:
            raise DataError(f"mapping expects dimension {p}, got a scalar")
        return float(mapping.intercept + coef[0] * arr)
    if arr.ndim == 1:
        if p == 1:
            return mapping.intercept + coef[0] * arr
        if arr.shape[0] != p:
            raise DataError(f"mapping expects dimension {p}, got {arr.shape[0]}")
        return float(mapping.intercept + coef @ arr)
    if arr.ndim == 2:
        if arr.shape[1] != p:
            raise DataError(f"mapping expects dimension {p}, got {arr.shape[1]}")
        return mapping.intercept + arr @ coef
    raise DataError(f"mapping input must have at most 2 dimensions, got {arr.ndim}")
