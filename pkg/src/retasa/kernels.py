"""Kernel functions, bandwidth rules, KDE, and Nadaraya-Watson weights.

These are the estimation primitives for the conditional-expectation
operators and the density-ratio input of the adaptation pipeline. All
operations are pure; heavy pairwise work runs on the selected backend
(compiled extension or NumPy fallback, see :mod:`retasa._backend`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DataError, NumericalError

GAUSSIAN = "gaussian"
EPANECHNIKOV = "epanechnikov"
_KINDS = (GAUSSIAN, EPANECHNIKOV)

_GAUSS_NORM = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family plus a bandwidth in the units of the smoothed variable."""

    kind: str
    bandwidth: float

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {_KINDS}")
        if not np.isfinite(self.bandwidth) or self.bandwidth <= 0.0:
            raise ValueError(f"bandwidth must be a positive finite real, got {self.bandwidth}")


@dataclass(frozen=True)
class BandwidthRule:
    """Bandwidth selection rule: ``silverman``, ``scott``, or ``fixed``."""

    kind: str
    value: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("silverman", "scott", "fixed"):
            raise ValueError(f"unknown bandwidth rule {self.kind!r}")
        if self.kind == "fixed":
            if self.value is None or not np.isfinite(self.value) or self.value <= 0.0:
                raise ValueError("fixed bandwidth rule requires a positive finite value")
        elif self.value is not None:
            raise ValueError(f"rule {self.kind!r} does not take a value")

    @classmethod
    def silverman(cls) -> "BandwidthRule":
        return cls("silverman")

    @classmethod
    def scott(cls) -> "BandwidthRule":
        return cls("scott")

    @classmethod
    def fixed(cls, h: float) -> "BandwidthRule":
        return cls("fixed", float(h))


def as_matrix(points, name: str = "points") -> np.ndarray:
    """Coerce a list of vectors / 1-D array / 2-D array to (n, d) float64."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DataError(f"{name} must be a vector or a matrix, got ndim={arr.ndim}")
    if arr.shape[0] == 0:
        raise DataError(f"{name} must contain at least one point")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return np.ascontiguousarray(arr)


def _as_query_matrix(query, d: int, name: str = "query") -> tuple[np.ndarray, bool]:
    """Coerce a query (scalar, vector, or matrix) to (nq, d); report scalar-ness."""
    arr = np.asarray(query, dtype=np.float64)
    if arr.ndim == 0:
        if d != 1:
            raise DataError(f"{name} is scalar but points have dimension {d}")
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if d == 1:
            return np.ascontiguousarray(arr[:, None]), False
        if arr.shape[0] == d:
            return arr.reshape(1, d), True
        raise DataError(f"{name} has length {arr.shape[0]} but points have dimension {d}")
    if arr.ndim == 2:
        if arr.shape[1] != d:
            raise DataError(f"{name} has dimension {arr.shape[1]} but points have dimension {d}")
        return np.ascontiguousarray(arr), False
    raise DataError(f"{name} must have at most 2 dimensions, got {arr.ndim}")


def kernel_eval(spec: KernelSpec, u):
    """Evaluate the scaled kernel K(u / h) / h.

    Nonnegative, symmetric in ``u``, and integrates to one over u. Accepts a
    scalar or an ndarray; returns the same shape.
    """
    u = np.asarray(u, dtype=np.float64)
    t = u / spec.bandwidth
    if spec.kind == GAUSSIAN:
        vals = _GAUSS_NORM * np.exp(-0.5 * t * t)
    else:
        vals = np.maximum(0.75 * (1.0 - t * t), 0.0)
    out = vals / spec.bandwidth
    return float(out) if out.ndim == 0 else out


def select_bandwidth(samples, rule: BandwidthRule) -> float:
    """Pick a bandwidth for a univariate sample.

    silverman: 0.9 * min(sd, IQR / 1.34) * n**(-1/5)
    scott:     1.06 * sd * n**(-1/5)
    fixed:     the given value, unchanged.

    The sd is the sample (n-1) standard deviation and the IQR uses linear
    quantile interpolation. When the IQR is zero (heavy ties) Silverman
    falls back to the sd alone.
    """
    if rule.kind == "fixed":
        return float(rule.value)  # type: ignore[arg-type]
    y = np.asarray(samples, dtype=np.float64).ravel()
    if y.size < 2:
        raise DataError("bandwidth selection requires at least 2 samples")
    sd = float(np.std(y, ddof=1))
    if sd == 0.0:
        raise DataError("bandwidth selection is degenerate: all sample values are identical")
    n = y.size
    if rule.kind == "scott":
        return 1.06 * sd * n ** (-0.2)
    iqr = float(np.quantile(y, 0.75) - np.quantile(y, 0.25))
    spread = min(sd, iqr / 1.34) if iqr > 0.0 else sd
    return 0.9 * spread * n ** (-0.2)


def kde_pdf(points, spec: KernelSpec, query):
    """Product-kernel density estimate at ``query``.

    ``points`` is (n, d) (a 1-D array is treated as d=1); ``query`` may be a
    single point or a batch of query points. Returns a float for a single
    query, else a 1-D array.
    """
    pts = as_matrix(points)
    q, scalar = _as_query_matrix(query, pts.shape[1])
    if spec.kind == GAUSSIAN:
        vals = _backend.gaussian_kde_values(q, pts, spec.bandwidth)
    else:
        vals = _backend.epanechnikov_kde_values(q, pts, spec.bandwidth)
    return float(vals[0]) if scalar else vals


def nw_weights(query, points, spec: KernelSpec) -> np.ndarray:
    """Kernel-normalized weights of ``query`` over ``points`` (a simplex vector)."""
    pts = as_matrix(points)
    q, _ = _as_query_matrix(query, pts.shape[1])
    if q.shape[0] != 1:
        raise DataError("nw_weights takes a single query point; use nw_matrix for batches")
    return nw_matrix(q, pts, spec)[0]


def nw_matrix(queries, points, spec: KernelSpec) -> np.ndarray:
    """Stacked Nadaraya-Watson weights: row i is nw_weights(queries[i], points)."""
    pts = as_matrix(points)
    q, _ = _as_query_matrix(queries, pts.shape[1], name="queries")
    if spec.kind == GAUSSIAN:
        return _backend.gaussian_nw_matrix(q, pts, spec.bandwidth)
    try:
        return _backend.epanechnikov_nw_matrix(q, pts, spec.bandwidth)
    except ValueError as exc:
        raise NumericalError(str(exc)) from exc
