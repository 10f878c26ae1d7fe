"""Experiment configuration: defaults, YAML loading, overrides, validation."""

from __future__ import annotations

import copy
import hashlib
import json
from typing import Any

import numpy as np
import yaml

from .errors import ConfigError

DEFAULTS: dict[str, Any] = {
    "dataset": {
        "kind": "nonlinear",  # nonlinear | linear | csv
        "n": 500,
        "m": None,  # target size; default round(size_ratio * source size)
        "size_ratio": 0.8,
        "mu_t": 0.5,  # nonlinear design only
        "path": None,  # csv only
        "response": None,
        "features": [],
        "log_response": False,
    },
    "shift": {
        "kind": "nonlinear",  # nonlinear | tnorm | bootstrap
        "mu": 0.5,
        "sigma": 0.1,
    },
    "estimator": {
        "kernel": "gaussian",  # gaussian | epanechnikov
        "bandwidth_rule": "silverman",  # silverman | scott | fixed
        "bandwidth_value": None,
        "eta_floor": None,  # absolute clamp; None = relative default
        "center_eta": False,
        "alpha": None,  # fixed value, or None to tune on the grid
        "alpha_grid": {"min": 1e-3, "max": 10.0, "num": 25},
        "criterion": "residual",  # residual | extended
        "weight_policy": "clamp_rescale",  # clamp_rescale | clamp_only | raw
        "mapping": "auto",  # auto | on | off
    },
    "prediction": {"degree": 5},
    "arms": ["none", "oracle", "retasa"],
    "seed": 20230815,
    "reps": 20,
    "out": None,
    "trim": 0.05,  # two-sided trim fraction for summary statistics
}

_ARMS = ("none", "oracle", "retasa")
_AXES = ("alpha", "sigma", "mu_t", "n", "size_ratio")


def load_config(path: str | None) -> dict[str, Any]:
    """Read a YAML config file and merge it over the defaults."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                user = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        if user is None:
            user = {}
        if not isinstance(user, dict):
            raise ConfigError(f"config {path} must be a mapping at the top level")
        _merge(cfg, user, path)
    return cfg


def _merge(base: dict, user: dict, path: str, prefix: str = "") -> None:
    for key, value in user.items():
        where = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(f"{path}: unknown config key {where!r}")
        if isinstance(base[key], dict) and key != "alpha_grid":
            if not isinstance(value, dict):
                raise ConfigError(f"{path}: {where!r} must be a mapping")
            _merge(base[key], value, path, prefix=f"{where}.")
        elif key == "alpha_grid" and isinstance(value, dict):
            for k in value:
                if k not in base[key]:
                    raise ConfigError(f"{path}: unknown config key {where}.{k}")
            base[key].update(value)
        else:
            base[key] = value


def apply_overrides(cfg: dict[str, Any], overrides: list[str]) -> None:
    """Apply repeatable --set KEY=VALUE flags; keys are dotted paths."""
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            if not isinstance(node, dict) or part not in node:
                raise ConfigError(f"--set: unknown config key {key!r}")
            node = node[part]
        leaf = parts[-1]
        if not isinstance(node, dict) or leaf not in node:
            raise ConfigError(f"--set: unknown config key {key!r}")
        try:
            node[leaf] = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"--set: cannot parse value for {key!r}: {exc}") from exc


def config_hash(cfg: dict[str, Any]) -> str:
    """Short stable digest of the resolved configuration.

    The output directory is excluded: it has no effect on the results and
    the same experiment written to two places must hash identically.
    """
    body = {k: v for k, v in cfg.items() if k != "out"}
    blob = json.dumps(body, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def validate(cfg: dict[str, Any]) -> dict[str, Any]:
    """Check types and ranges; returns the config for chaining."""
    ds, sh, est = cfg["dataset"], cfg["shift"], cfg["estimator"]
    _require(ds["kind"] in ("nonlinear", "linear", "csv"), f"unknown dataset kind {ds['kind']!r}")
    _require(sh["kind"] in ("nonlinear", "tnorm", "bootstrap"), f"unknown shift kind {sh['kind']!r}")
    if sh["kind"] == "nonlinear":
        _require(
            ds["kind"] == "nonlinear",
            "shift kind 'nonlinear' requires the nonlinear dataset",
        )
    if ds["kind"] == "csv":
        _require(ds["path"], "csv dataset requires dataset.path")
        _require(ds["response"], "csv dataset requires dataset.response")
        _require(bool(ds["features"]), "csv dataset requires dataset.features")
    else:
        _require(isinstance(ds["n"], int) and ds["n"] >= 20, "dataset.n must be an integer >= 20")
    if ds["m"] is not None:
        _require(isinstance(ds["m"], int) and ds["m"] >= 1, "dataset.m must be a positive integer")
    _require(0.0 < float(ds["size_ratio"]) <= 1.0, "dataset.size_ratio must lie in (0, 1]")
    if sh["kind"] == "tnorm":
        _require(0.0 <= float(sh["mu"]) <= 1.0, "shift.mu must lie in [0, 1]")
        _require(float(sh["sigma"]) > 0.0, "shift.sigma must be positive")
    _require(est["kernel"] in ("gaussian", "epanechnikov"), f"unknown kernel {est['kernel']!r}")
    _require(
        est["bandwidth_rule"] in ("silverman", "scott", "fixed"),
        f"unknown bandwidth rule {est['bandwidth_rule']!r}",
    )
    if est["bandwidth_rule"] == "fixed":
        _require(
            est["bandwidth_value"] is not None and float(est["bandwidth_value"]) > 0.0,
            "fixed bandwidth rule requires a positive estimator.bandwidth_value",
        )
    if est["eta_floor"] is not None:
        _require(float(est["eta_floor"]) >= 0.0, "estimator.eta_floor must be nonnegative")
    if est["alpha"] is not None:
        _require(float(est["alpha"]) > 0.0, "estimator.alpha must be positive")
    grid = est["alpha_grid"]
    _require(
        float(grid["min"]) > 0.0 and float(grid["max"]) >= float(grid["min"]),
        "estimator.alpha_grid must satisfy 0 < min <= max",
    )
    _require(int(grid["num"]) >= 1, "estimator.alpha_grid.num must be >= 1")
    _require(est["criterion"] in ("residual", "extended"), f"unknown criterion {est['criterion']!r}")
    _require(
        est["weight_policy"] in ("clamp_rescale", "clamp_only", "raw"),
        f"unknown weight policy {est['weight_policy']!r}",
    )
    _require(est["mapping"] in ("auto", "on", "off"), f"unknown mapping mode {est['mapping']!r}")
    _require(int(cfg["prediction"]["degree"]) >= 1, "prediction.degree must be >= 1")
    _require(bool(cfg["arms"]), "arms must be nonempty")
    for arm in cfg["arms"]:
        _require(arm in _ARMS, f"unknown arm {arm!r}; expected subset of {_ARMS}")
    _require(
        isinstance(cfg["seed"], int) and cfg["seed"] >= 0,
        "seed must be a nonnegative integer",
    )
    _require(isinstance(cfg["reps"], int) and cfg["reps"] >= 1, "reps must be a positive integer")
    _require(0.0 <= float(cfg["trim"]) < 0.5, "trim must lie in [0, 0.5)")
    return cfg


def validate_axis(cfg: dict[str, Any], axis: str, grid: list) -> None:
    _require(axis in _AXES, f"unknown sweep axis {axis!r}; expected one of {_AXES}")
    _require(bool(grid), "sweep grid must be nonempty")
    if axis == "alpha":
        _require(all(float(v) > 0.0 for v in grid), "alpha sweep values must be positive")
    elif axis == "sigma":
        _require(cfg["shift"]["kind"] == "tnorm", "sigma sweep requires shift.kind=tnorm")
        _require(all(float(v) > 0.0 for v in grid), "sigma sweep values must be positive")
    elif axis == "mu_t":
        _require(
            cfg["dataset"]["kind"] == "nonlinear", "mu_t sweep requires the nonlinear dataset"
        )
    elif axis == "n":
        _require(
            all(int(v) >= 20 for v in grid), "n sweep values must be integers >= 20"
        )
    elif axis == "size_ratio":
        _require(
            all(0.0 < float(v) <= 1.0 for v in grid), "size_ratio sweep values must lie in (0, 1]"
        )


def alpha_grid_values(cfg: dict[str, Any]) -> list[float]:
    grid = cfg["estimator"]["alpha_grid"]
    lo, hi, num = float(grid["min"]), float(grid["max"]), int(grid["num"])
    if num == 1:
        return [lo]
    return list(np.geomspace(lo, hi, num))
