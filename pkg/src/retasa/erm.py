"""Importance-weighted least squares with per-coordinate polynomial features.

fit_weighted minimizes sum_i w_i (f(x_i) - y_i)^2 over polynomials whose
features are the per-coordinate powers x_j, x_j^2, ..., x_j^degree (no cross
terms) plus an intercept. Solved by weighted normal equations on
norm-equilibrated columns; a tiny ridge (1e-10 * trace of the Gram matrix)
is applied only if the plain factorization fails, so well-posed fits match
ordinary least squares exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DataError, NumericalError
from .kernels import as_matrix

RIDGE_SCALE = 1e-10
_RANK_RTOL = 1e-12


@dataclass(frozen=True)
class PolynomialModel:
    """Fitted polynomial; coefficients are ordered power-major:
    [x_1, ..., x_p, x_1^2, ..., x_p^2, ..., x_1^degree, ..., x_p^degree]."""

    degree: int
    coefficients: np.ndarray
    intercept: float


def expand_features(x: np.ndarray, degree: int) -> np.ndarray:
    """Per-coordinate power expansion, shape (n, p * degree)."""
    return np.hstack([x**k for k in range(1, degree + 1)])


def fit_weighted(X, y, w, degree: int) -> PolynomialModel:
    """Weighted polynomial least squares."""
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    xs = as_matrix(X, "X")
    y = np.asarray(y, dtype=np.float64).ravel()
    w = np.asarray(w, dtype=np.float64).ravel()
    n = xs.shape[0]
    if y.shape[0] != n or w.shape[0] != n:
        raise DataError(f"X/y/w length mismatch: {n}, {y.shape[0]}, {w.shape[0]}")
    if np.any(w < 0.0) or not np.all(np.isfinite(w)):
        raise DataError("weights must be finite and nonnegative")
    if not np.any(w > 0.0):
        raise DataError("all weights are zero")

    design = np.column_stack([np.ones(n), expand_features(xs, degree)])
    q = design.shape[1]
    sw = np.sqrt(w)
    dw = design * sw[:, None]

    # Equilibrate columns to unit weighted norm: keeps the Gram matrix well
    # scaled and makes the solution exactly invariant to rescaling w.
    scale = np.sqrt((dw * dw).sum(axis=0))
    if np.any(scale == 0.0):
        raise DataError("expanded design has a zero column under the given weights")
    dws = dw / scale
    gram = dws.T @ dws
    rhs = dws.T @ (sw * y)

    eigs = scipy.linalg.eigvalsh(gram)
    if eigs[0] <= _RANK_RTOL * eigs[-1]:
        raise DataError("expanded design is rank deficient under the given weights")
    try:
        beta_s = scipy.linalg.solve(gram, rhs, assume_a="pos")
    except (scipy.linalg.LinAlgError, ValueError):
        guarded = gram + RIDGE_SCALE * np.trace(gram) * np.eye(q)
        try:
            beta_s = scipy.linalg.solve(guarded, rhs, assume_a="pos")
        except (scipy.linalg.LinAlgError, ValueError) as exc:
            raise NumericalError(f"weighted normal equations failed: {exc}") from exc
    beta = beta_s / scale
    return PolynomialModel(degree=degree, coefficients=beta[1:], intercept=float(beta[0]))


def predict(model: PolynomialModel, X):
    """Evaluate the fitted polynomial at one point or a batch of points."""
    p = _input_dim(model)
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 0:
        xs, single = arr.reshape(1, 1), True
    elif arr.ndim == 1:
        if p == 1:
            xs, single = arr[:, None], False
        else:
            xs, single = arr.reshape(1, -1), True
    elif arr.ndim == 2:
        xs, single = arr, False
    else:
        raise DataError(f"X must have at most 2 dimensions, got {arr.ndim}")
    if xs.shape[1] != p:
        raise DataError(f"model expects dimension {p}, got {xs.shape[1]}")
    vals = model.intercept + expand_features(xs, model.degree) @ model.coefficients
    return float(vals[0]) if single else vals


def _input_dim(model: PolynomialModel) -> int:
    return model.coefficients.shape[0] // model.degree
