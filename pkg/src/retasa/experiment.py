"""Replication driver: simulate a shift, estimate weights, adapt, evaluate.

One replication builds a (source, target) pair according to the configured
dataset and shift, runs the weight-estimation pipeline, then fits one
prediction model per arm by weighted least squares:

* ``none``   -- unit weights (no adaptation),
* ``oracle`` -- the ground-truth weights of the simulated shift,
* ``retasa`` -- the estimated weights.

Weight error is scored against the ground truth at the source responses for
the nonlinear and bootstrap designs and at the withheld target responses for
the truncated-normal resampling shift (where the estimate is evaluated
off-sample). Prediction error is always scored on the withheld target
responses.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import config as cfgmod
from .datasets import Dataset, gen_linear, gen_nonlinear, load_csv, nonlinear_oracle_weights
from .density_ratio import EtaEstimate, estimate_eta
from .erm import fit_weighted, predict
from .errors import DataError, RetasaError
from .kernels import BandwidthRule, KernelSpec, select_bandwidth
from .mapping import apply_mapping, fit_mapping
from .metrics import delta_accuracy, prediction_mse, trimmed_summary, weight_mse
from .shift import EmpiricalCdf, ShiftSpec, oracle_weights, simulate_target_shift
from .solver import (
    OperatorMatrices,
    build_operators,
    evaluate_rho_offsample,
    solve_tikhonov,
    tune_alpha,
)

ARM_ORDER = ("none", "oracle", "retasa")


def derive_seed(master: int, *path: int) -> int:
    """Deterministic child seed for (replication, stream) paths."""
    return int(np.random.SeedSequence([master, *path]).generate_state(1, np.uint64)[0])


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


@dataclass(frozen=True)
class RepData:
    """One replication's data: training source, target covariates, withheld
    target responses, ground-truth weights at the source responses, and the
    weight-evaluation points with their ground-truth values."""

    source: Dataset
    target_x: np.ndarray
    target_y: np.ndarray
    oracle_source_w: np.ndarray
    eval_on: str  # "source" | "target"
    oracle_eval_w: np.ndarray


@dataclass(frozen=True)
class WeightFit:
    """Everything the estimation pipeline produced for one replication."""

    alpha: float
    omega_source: np.ndarray
    rho: np.ndarray
    rescale_factor: float
    ops: OperatorMatrices
    eta: EtaEstimate
    spec_y: KernelSpec
    source_y: np.ndarray
    policy: str
    tuning_scores: np.ndarray | None


@dataclass(frozen=True)
class ArmMetrics:
    rep: int
    arm: str
    weight_mse: float
    pred_mse: float
    delta_acc: float
    alpha_used: float | None
    wall_time_ms: float


@dataclass(frozen=True)
class ExperimentReport:
    rows: list[ArmMetrics]
    summaries: dict[str, dict[str, tuple[float, float]]]


def _base_source(cfg: dict[str, Any], rep: int) -> Dataset:
    ds = cfg["dataset"]
    seed = derive_seed(cfg["seed"], rep, 0)
    if ds["kind"] == "linear":
        return gen_linear(ds["n"], seed)
    if ds["kind"] == "csv":
        loaded = load_csv(ds["path"], ds["response"], list(ds["features"]), ds["log_response"])
        data = loaded.dataset()
        n = ds["n"]
        if n is not None and n < data.n:
            idx = _rng(seed).choice(data.n, size=n, replace=False)
            data = Dataset(x=data.x[idx], y=data.y[idx])
        return data
    raise DataError(f"dataset kind {ds['kind']!r} has no standalone source")


def _target_size(cfg: dict[str, Any], n_source: int) -> int:
    m = cfg["dataset"]["m"]
    if m is None:
        m = round(float(cfg["dataset"]["size_ratio"]) * n_source)
    return max(int(m), 1)


def make_replication_data(cfg: dict[str, Any], rep: int) -> RepData:
    """Build one replication's (source, target, oracle) triple."""
    kind = cfg["shift"]["kind"]
    if kind == "nonlinear":
        n = cfg["dataset"]["n"]
        mu_t = float(cfg["dataset"]["mu_t"])
        m = cfg["dataset"]["m"] or round(float(cfg["dataset"]["size_ratio"]) * n)
        source, target = gen_nonlinear(n, mu_t, derive_seed(cfg["seed"], rep, 0), m=m)
        oracle_w = nonlinear_oracle_weights(source.y, mu_t)
        return RepData(
            source=source,
            target_x=target.x,
            target_y=target.y,
            oracle_source_w=oracle_w,
            eval_on="source",
            oracle_eval_w=oracle_w,
        )
    source = _base_source(cfg, rep) if cfg["dataset"]["kind"] != "nonlinear" else None
    if source is None:
        src, _ = gen_nonlinear(
            cfg["dataset"]["n"],
            float(cfg["dataset"]["mu_t"]),
            derive_seed(cfg["seed"], rep, 0),
            m=1,
        )
        source = src
    m = _target_size(cfg, source.n)
    if kind == "tnorm":
        spec = ShiftSpec(mu=float(cfg["shift"]["mu"]), sigma=float(cfg["shift"]["sigma"]))
        drawn = simulate_target_shift(
            source.x, source.y, m, spec, derive_seed(cfg["seed"], rep, 1)
        )
        cdf = EmpiricalCdf.from_sample(source.y)
        return RepData(
            source=source,
            target_x=drawn.x,
            target_y=drawn.y,
            oracle_source_w=oracle_weights(source.y, spec, cdf),
            eval_on="target",
            oracle_eval_w=oracle_weights(drawn.y, spec, cdf),
        )
    if kind == "bootstrap":
        idx = _rng(derive_seed(cfg["seed"], rep, 1)).integers(0, source.n, size=m)
        ones = np.ones(source.n)
        return RepData(
            source=source,
            target_x=source.x[idx],
            target_y=source.y[idx],
            oracle_source_w=ones,
            eval_on="source",
            oracle_eval_w=ones,
        )
    raise DataError(f"unknown shift kind {kind!r}")


def _bandwidth_rule(est: dict[str, Any]) -> BandwidthRule:
    if est["bandwidth_rule"] == "fixed":
        return BandwidthRule.fixed(float(est["bandwidth_value"]))
    return BandwidthRule(est["bandwidth_rule"])


@dataclass(frozen=True)
class Prepared:
    """Operators and density-ratio input, ready for the regularized solve."""

    ops: OperatorMatrices
    eta: EtaEstimate
    spec_y: KernelSpec


def prepare_operators(
    cfg: dict[str, Any],
    source: Dataset,
    target_x: np.ndarray,
    mapping_fn=None,
) -> Prepared:
    """Mapping, bandwidths, density ratio, and operator construction.

    ``mapping_fn`` may be any callable taking an (n, p) covariate matrix and
    returning n scalars; it overrides the configured mapping mode, so
    externally trained reduction models can be plugged in.
    """
    est = cfg["estimator"]
    if mapping_fn is not None:
        z_s = np.asarray(mapping_fn(source.x), dtype=np.float64).ravel()
        z_t = np.asarray(mapping_fn(target_x), dtype=np.float64).ravel()
    elif est["mapping"] == "on" or (est["mapping"] == "auto" and source.p > 1):
        fmap = fit_mapping(source.x, source.y)
        z_s = np.asarray(apply_mapping(fmap, source.x))
        z_t = np.asarray(apply_mapping(fmap, target_x))
    else:
        z_s = source.x.ravel()
        z_t = np.asarray(target_x, dtype=np.float64).ravel()

    rule = _bandwidth_rule(est)
    kern = est["kernel"]
    spec_zs = KernelSpec(kern, select_bandwidth(z_s, rule))
    spec_zt = KernelSpec(kern, select_bandwidth(z_t, rule))
    spec_y = KernelSpec(kern, select_bandwidth(source.y, rule))

    floor = est["eta_floor"]
    eta = estimate_eta(
        z_s, z_t, spec_zs, spec_zt,
        floor=None if floor is None else float(floor),
        center=bool(est["center_eta"]),
    )
    ops = build_operators(z_s, source.y, spec_x=spec_zs, spec_y=spec_y)
    return Prepared(ops=ops, eta=eta, spec_y=spec_y)


def estimate_weights(
    cfg: dict[str, Any],
    source: Dataset,
    target_x: np.ndarray,
    mapping_fn=None,
) -> WeightFit:
    """Run the full weight-estimation pipeline on one replication's data."""
    est = cfg["estimator"]
    prep = prepare_operators(cfg, source, target_x, mapping_fn=mapping_fn)
    ops, eta, spec_y = prep.ops, prep.eta, prep.spec_y

    scores = None
    if est["alpha"] is None:
        tuned = tune_alpha(cfgmod.alpha_grid_values(cfg), est["criterion"], ops, eta)
        alpha, scores = tuned.alpha, tuned.scores
    else:
        alpha = float(est["alpha"])
    west = solve_tikhonov(ops, eta, alpha, policy=est["weight_policy"])
    return WeightFit(
        alpha=alpha,
        omega_source=west.omega,
        rho=west.rho,
        rescale_factor=west.rescale_factor,
        ops=ops,
        eta=eta,
        spec_y=spec_y,
        source_y=source.y,
        policy=est["weight_policy"],
        tuning_scores=scores,
    )


def tuning_table(cfg: dict[str, Any], rep: int = 0):
    """Score the configured alpha grid on one replication's data."""
    data = make_replication_data(cfg, rep)
    prep = prepare_operators(cfg, data.source, data.target_x)
    return tune_alpha(
        cfgmod.alpha_grid_values(cfg), cfg["estimator"]["criterion"], prep.ops, prep.eta
    )


def weights_at(fit: WeightFit, y) -> np.ndarray:
    """Estimated importance weights at arbitrary responses, under the same
    finalization policy (and rescale factor) as the source-point weights."""
    rho_y = evaluate_rho_offsample(
        np.asarray(y, dtype=np.float64).ravel(),
        fit.source_y,
        fit.spec_y,
        fit.ops,
        fit.rho,
        fit.eta,
        fit.alpha,
    )
    omega = rho_y + 1.0
    if fit.policy in ("clamp_rescale", "clamp_only"):
        omega = np.maximum(omega, 0.0)
    if fit.policy == "clamp_rescale":
        omega = omega * fit.rescale_factor
    return omega


def run_replication(cfg: dict[str, Any], rep: int) -> list[ArmMetrics]:
    """Run every configured arm on one replication and score it."""
    data = make_replication_data(cfg, rep)
    degree = int(cfg["prediction"]["degree"])
    arms = list(cfg["arms"])

    fit = None
    est_ms = 0.0
    if "retasa" in arms:
        t0 = time.perf_counter()
        try:
            fit = estimate_weights(cfg, data.source, data.target_x)
        except RetasaError as exc:
            raise type(exc)(f"weight estimation (rep {rep}): {exc}") from exc
        est_ms = 1e3 * (time.perf_counter() - t0)

    ones = np.ones(data.source.n)
    baseline_model = fit_weighted(data.source.x, data.source.y, ones, degree)
    baseline_mse = prediction_mse(predict(baseline_model, data.target_x), data.target_y)

    rows = []
    for arm in arms:
        t0 = time.perf_counter()
        if arm == "none":
            w_source, w_eval = ones, np.ones_like(data.oracle_eval_w)
        elif arm == "oracle":
            w_source, w_eval = data.oracle_source_w, data.oracle_eval_w
        else:
            assert fit is not None
            w_source = fit.omega_source
            w_eval = (
                fit.omega_source if data.eval_on == "source" else weights_at(fit, data.target_y)
            )
        if arm == "none":
            model, mse = baseline_model, baseline_mse
        else:
            try:
                model = fit_weighted(data.source.x, data.source.y, w_source, degree)
            except RetasaError as exc:
                raise type(exc)(f"weighted fit ({arm}, rep {rep}): {exc}") from exc
            mse = prediction_mse(predict(model, data.target_x), data.target_y)
        elapsed = 1e3 * (time.perf_counter() - t0) + (est_ms if arm == "retasa" else 0.0)
        rows.append(
            ArmMetrics(
                rep=rep,
                arm=arm,
                weight_mse=weight_mse(w_eval, data.oracle_eval_w),
                pred_mse=mse,
                delta_acc=delta_accuracy(mse, baseline_mse),
                alpha_used=fit.alpha if arm == "retasa" else None,
                wall_time_ms=elapsed,
            )
        )
    return rows


def _worker(args: tuple[dict[str, Any], int]) -> list[ArmMetrics]:
    return run_replication(*args)


def max_workers() -> int:
    raw = os.environ.get("RETASA_THREADS", "1")
    try:
        return max(int(raw), 1)
    except ValueError:
        return 1


def run_experiment(cfg: dict[str, Any]) -> ExperimentReport:
    """Run all replications (parallel when RETASA_THREADS > 1) and summarize."""
    reps = int(cfg["reps"])
    workers = min(max_workers(), reps)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_worker, [(cfg, r) for r in range(reps)]))
    else:
        chunks = [run_replication(cfg, r) for r in range(reps)]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r.rep, ARM_ORDER.index(r.arm)))
    return ExperimentReport(rows=rows, summaries=summarize(rows, float(cfg["trim"])))


def summarize(
    rows: list[ArmMetrics], trim: float
) -> dict[str, dict[str, tuple[float, float]]]:
    """Per-arm trimmed (mean, sd) of each metric across replications."""
    out: dict[str, dict[str, tuple[float, float]]] = {}
    for arm in sorted({r.arm for r in rows}, key=ARM_ORDER.index):
        sub = [r for r in rows if r.arm == arm]
        out[arm] = {
            metric: tuple(trimmed_summary([getattr(r, metric) for r in sub], trim))
            for metric in ("weight_mse", "pred_mse", "delta_acc")
        }
    return out
