"""Target-shift simulation by inverse sampling through the empirical CDF.

A truncated normal on (0, 1) replaces the uniform in the inverse-CDF
construction: drawing u ~ TNORM<0,1>(mu, sigma) and emitting the first
source pair whose empirical-CDF position reaches u yields a resample whose
response marginal is shifted while the covariate-given-response law is
untouched. The ground-truth importance weight of the construction is the
truncated-normal pdf evaluated at the empirical CDF of the response.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DataError
from .kernels import as_matrix

_TINY = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class ShiftSpec:
    """Parameters of the truncated normal TNORM<0,1>(mu, sigma)."""

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")
        if not np.isfinite(self.sigma) or self.sigma <= 0.0:
            raise ValueError(f"sigma must be a positive finite real, got {self.sigma}")

    @property
    def lower_z(self) -> float:
        return (0.0 - self.mu) / self.sigma

    @property
    def upper_z(self) -> float:
        return (1.0 - self.mu) / self.sigma


def truncnorm_pdf(spec: ShiftSpec, u):
    """pdf of TNORM<0,1>(mu, sigma); zero outside [0, 1]."""
    u = np.asarray(u, dtype=np.float64)
    mass = ndtr(spec.upper_z) - ndtr(spec.lower_z)
    z = (u - spec.mu) / spec.sigma
    vals = np.exp(-0.5 * z * z) / (np.sqrt(2.0 * np.pi) * spec.sigma * mass)
    vals = np.where((u >= 0.0) & (u <= 1.0), vals, 0.0)
    return float(vals) if vals.ndim == 0 else vals


def truncnorm_mean(spec: ShiftSpec) -> float:
    """Analytic mean mu + sigma * (phi(a) - phi(b)) / (Phi(b) - Phi(a))."""
    a, b = spec.lower_z, spec.upper_z
    phi = lambda z: np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)
    return spec.mu + spec.sigma * (phi(a) - phi(b)) / (ndtr(b) - ndtr(a))


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def sample_truncnorm(spec: ShiftSpec, m: int, seed: int) -> np.ndarray:
    """m inverse-CDF draws of TNORM<0,1>(mu, sigma), deterministic given seed.

    u = mu + sigma * Phi^-1(Phi(a) + U * (Phi(b) - Phi(a))). Results are
    clipped to the open interval (0, 1) to guard the U=0 float edge.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    lo, hi = ndtr(spec.lower_z), ndtr(spec.upper_z)
    u = _rng(seed).random(m)
    draws = spec.mu + spec.sigma * ndtri(lo + u * (hi - lo))
    return np.clip(draws, _TINY, np.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class EmpiricalCdf:
    """Step CDF of a sorted sample; F(y) = #{y_i <= y} / N."""

    sorted_y: np.ndarray

    def __post_init__(self) -> None:
        y = np.asarray(self.sorted_y, dtype=np.float64)
        if y.ndim != 1 or y.size == 0:
            raise DataError("EmpiricalCdf requires a nonempty 1-D sample")
        if np.any(np.diff(y) < 0.0):
            raise DataError("EmpiricalCdf sample must be sorted ascending")
        object.__setattr__(self, "sorted_y", y)

    @classmethod
    def from_sample(cls, y) -> "EmpiricalCdf":
        return cls(sorted_y=np.sort(np.asarray(y, dtype=np.float64).ravel()))

    def __call__(self, y):
        y = np.asarray(y, dtype=np.float64)
        vals = np.searchsorted(self.sorted_y, y, side="right") / self.sorted_y.size
        return float(vals) if vals.ndim == 0 else vals


def target_indices(u: np.ndarray, n_source: int) -> np.ndarray:
    """Smallest 1-based j with j / N >= u, i.e. ceil(u * N), for u in (0, 1)."""
    j = np.ceil(np.asarray(u, dtype=np.float64) * n_source).astype(np.int64)
    return np.clip(j, 1, n_source)


@dataclass(frozen=True)
class TargetSample:
    """Shifted resample of the source: covariates, withheld responses, and
    the (0-based) source rows each draw came from."""

    x: np.ndarray
    y: np.ndarray
    indices: np.ndarray
    input_was_sorted: bool


def simulate_target_shift(
    source_x,
    source_y,
    m: int,
    spec: ShiftSpec,
    seed: int,
    on_unsorted: str = "sort",
) -> TargetSample:
    """Draw m target pairs from the source sample under the shift spec.

    The source must be sorted ascending in the response; with
    ``on_unsorted="sort"`` (default) an unsorted input is sorted internally
    and flagged in the result, with ``on_unsorted="error"`` it raises.
    """
    if on_unsorted not in ("sort", "error"):
        raise ValueError(f"on_unsorted must be 'sort' or 'error', got {on_unsorted!r}")
    xs = as_matrix(source_x, "source_x")
    ys = np.asarray(source_y, dtype=np.float64).ravel()
    if xs.shape[0] != ys.shape[0]:
        raise DataError(f"covariate/response length mismatch: {xs.shape[0]} vs {ys.shape[0]}")
    was_sorted = bool(np.all(np.diff(ys) >= 0.0))
    if not was_sorted:
        if on_unsorted == "error":
            raise DataError("source sample must be sorted ascending in the response")
        order = np.argsort(ys, kind="stable")
        xs, ys = xs[order], ys[order]
    u = sample_truncnorm(spec, m, seed)
    idx = target_indices(u, ys.size) - 1
    return TargetSample(x=xs[idx], y=ys[idx], indices=idx, input_was_sorted=was_sorted)


def oracle_weights(y_values, spec: ShiftSpec | None, cdf: EmpiricalCdf) -> np.ndarray:
    """Ground-truth weights of the simulated shift at the given responses.

    ``spec=None`` means the target position law is Uniform(0, 1) -- no shift
    -- whose density is identically one, so every weight is exactly 1.
    """
    y = np.asarray(y_values, dtype=np.float64).ravel()
    if spec is None:
        return np.ones_like(y)
    return truncnorm_pdf(spec, cdf(y))
