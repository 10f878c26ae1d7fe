"""Batch experiment CLI.

Subcommands:
  adapt     -- run the configured arms over seeded replications
  sweep     -- repeat adapt along one axis (alpha, sigma, mu_t, n, size_ratio)
  simulate  -- write a shifted (source, target) sample pair with oracle weights
  tune      -- score the alpha grid on one replication and report the argmin

Every output CSV starts with a `# config=<hash> seed=<seed>` comment line.
Exit codes: 0 ok, 2 config error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import os
import sys
from typing import Any

import numpy as np

from . import config as cfgmod
from ._backend import BACKEND
from .errors import ConfigError, DataError, NumericalError
from .experiment import make_replication_data, run_experiment, tuning_table
from .shift import EmpiricalCdf, ShiftSpec, oracle_weights

RESULT_COLUMNS = ("rep", "arm", "weight_mse", "pred_mse", "delta_acc", "alpha_used", "wall_time_ms")


def main(argv: list[str] | None = None) -> int:
    try:
        return _dispatch(argv)
    except ConfigError as exc:
        print(f"error (config): {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error (data): {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"error (numerical): {exc}", file=sys.stderr)
        return 4


def _dispatch(argv: list[str] | None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    cfg = cfgmod.load_config(args.config)
    cfgmod.apply_overrides(cfg, args.set or [])
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.reps is not None:
        cfg["reps"] = args.reps
    if args.out is not None:
        cfg["out"] = args.out
    cfgmod.validate(cfg)
    if cfg["out"] is None:
        raise ConfigError("an output directory is required (config key 'out' or --out)")
    os.makedirs(cfg["out"], exist_ok=True)
    return args.func(args, cfg)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="retasa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None, help="YAML config file")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--reps", type=int, default=None, help="override the replication count")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override a config key (dotted path, repeatable)",
        )

    p_adapt = sub.add_parser("adapt", help="run the adaptation experiment")
    common(p_adapt)
    p_adapt.set_defaults(func=cmd_adapt)

    p_sweep = sub.add_parser("sweep", help="run the experiment along one axis")
    common(p_sweep)
    p_sweep.add_argument(
        "--axis", required=True, choices=("alpha", "sigma", "mu_t", "n", "size_ratio")
    )
    p_sweep.add_argument(
        "--grid", required=True, help="comma-separated axis values, e.g. 0.01,0.1,1"
    )
    p_sweep.set_defaults(func=cmd_sweep)

    p_sim = sub.add_parser("simulate", help="write a shifted source/target sample pair")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_tune = sub.add_parser("tune", help="score the alpha grid on one replication")
    common(p_tune)
    p_tune.set_defaults(func=cmd_tune)
    return parser


def _header(cfg: dict[str, Any]) -> str:
    return f"# config={cfgmod.config_hash(cfg)} seed={cfg['seed']}"


def _write_csv(path: str, cfg: dict[str, Any], columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(_header(cfg) + "\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def _result_rows(rows) -> list[list]:
    return [
        [
            r.rep,
            r.arm,
            _fmt(r.weight_mse),
            _fmt(r.pred_mse),
            _fmt(r.delta_acc),
            _fmt(r.alpha_used),
            _fmt(r.wall_time_ms),
        ]
        for r in rows
    ]


def _summary_rows(summaries) -> list[list]:
    return [
        [arm, metric, _fmt(mean), _fmt(sd)]
        for arm, metrics in summaries.items()
        for metric, (mean, sd) in metrics.items()
    ]


def cmd_adapt(args, cfg: dict[str, Any]) -> int:
    report = run_experiment(cfg)
    out = cfg["out"]
    _write_csv(os.path.join(out, "results.csv"), cfg, RESULT_COLUMNS, _result_rows(report.rows))
    _write_csv(
        os.path.join(out, "summary.csv"),
        cfg,
        ("arm", "metric", "trimmed_mean", "trimmed_sd"),
        _summary_rows(report.summaries),
    )
    _write_report_json(
        os.path.join(out, "report.json"),
        cfg,
        {"summaries": _jsonable_summaries(report.summaries)},
    )
    return 0


def cmd_sweep(args, cfg: dict[str, Any]) -> int:
    grid = [item.strip() for item in args.grid.split(",") if item.strip()]
    values = [int(v) if args.axis == "n" else float(v) for v in grid]
    cfgmod.validate_axis(cfg, args.axis, values)
    rows_out: list[list] = []
    summaries: dict[str, Any] = {}
    for value in values:
        sub_cfg = _config_for_axis(cfg, args.axis, value)
        report = run_experiment(sub_cfg)
        for r in report.rows:
            rows_out.append([args.axis, value, *(_result_rows([r])[0])])
        summaries[str(value)] = _jsonable_summaries(report.summaries)
    out = cfg["out"]
    _write_csv(
        os.path.join(out, "sweep.csv"), cfg, ("axis", "value", *RESULT_COLUMNS), rows_out
    )
    _write_report_json(
        os.path.join(out, "report.json"),
        cfg,
        {"axis": args.axis, "grid": values, "summaries": summaries},
    )
    return 0


def _config_for_axis(cfg: dict[str, Any], axis: str, value) -> dict[str, Any]:
    sub = copy.deepcopy(cfg)
    if axis == "alpha":
        sub["estimator"]["alpha"] = float(value)
    elif axis == "sigma":
        sub["shift"]["sigma"] = float(value)
    elif axis == "mu_t":
        sub["dataset"]["mu_t"] = float(value)
    elif axis == "n":
        sub["dataset"]["n"] = int(value)
        sub["dataset"]["m"] = None
    else:
        sub["dataset"]["size_ratio"] = float(value)
        sub["dataset"]["m"] = None
    return cfgmod.validate(sub)


def cmd_simulate(args, cfg: dict[str, Any]) -> int:
    if cfg["shift"]["kind"] != "tnorm":
        raise ConfigError("simulate requires shift.kind=tnorm")
    data = make_replication_data(cfg, rep=0)
    out = cfg["out"]
    p = data.source.p
    xcols = [f"x{i + 1}" for i in range(p)]
    _write_csv(
        os.path.join(out, "source.csv"),
        cfg,
        (*xcols, "y"),
        [[*map(repr, row)] for row in _stack(data.source.x, data.source.y)],
    )
    spec = ShiftSpec(mu=float(cfg["shift"]["mu"]), sigma=float(cfg["shift"]["sigma"]))
    cdf = EmpiricalCdf.from_sample(data.source.y)
    w = oracle_weights(data.target_y, spec, cdf)
    _write_csv(
        os.path.join(out, "target.csv"),
        cfg,
        (*xcols, "y", "oracle_weight"),
        [[*map(repr, row)] for row in _stack(data.target_x, data.target_y, w)],
    )
    return 0


def _stack(x, *cols):
    return np.column_stack([x, *cols]).tolist()


def cmd_tune(args, cfg: dict[str, Any]) -> int:
    result = tuning_table(cfg, rep=0)
    out = cfg["out"]
    rows = [
        [repr(float(a)), repr(float(s)), int(a == result.alpha)]
        for a, s in result.scores
    ]
    _write_csv(os.path.join(out, "alpha_scores.csv"), cfg, ("alpha", "score", "selected"), rows)
    _write_report_json(
        os.path.join(out, "report.json"), cfg, {"alpha_star": result.alpha}
    )
    return 0


def _jsonable_summaries(summaries) -> dict[str, Any]:
    return {
        arm: {metric: {"trimmed_mean": mean, "trimmed_sd": sd} for metric, (mean, sd) in m.items()}
        for arm, m in summaries.items()
    }


def _write_report_json(path: str, cfg: dict[str, Any], payload: dict[str, Any]) -> None:
    body = {
        "config": cfg,
        "config_hash": cfgmod.config_hash(cfg),
        "seed": cfg["seed"],
        "backend": BACKEND,
        **payload,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(body, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


if __name__ == "__main__":
    sys.exit(main())
