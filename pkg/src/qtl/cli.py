"""Command-line experiment runner.

Subcommands: risk-curve, shift-sweep, bounds, validate.  Each run writes
RFC-4180 CSV tables (12 significant digits) plus static SVG figures
rendered from those CSVs, along with a small JSON sidecar recording the
seed and grid resolution.  Exit codes: 0 success, 1 validation failure,
2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import complexity, divergence, pipeline
from .config import ExperimentConfig, load_config
from .embedding import GridStates
from .errors import ConfigInvalid, QtlError
from .tasks import derive_seed
from .validate import run_validate

RISK_CURVE_HEADER = [
    "n_source",
    "n_target",
    "replications",
    "median",
    "q25",
    "q75",
    "excess_raw_mean",
    "bound_value",
    "bound_complexity_term",
    "bound_confidence_term",
    "bound_dst_term",
    "bound_source_complexity_term",
    "bound_source_confidence_term",
]

SHIFT_SWEEP_HEADER = ["shift", "median", "q25", "q75", "bound_value", "dst_trace", "dst_tv"]

BOUNDS_HEADER = [
    "n_source",
    "n_target",
    "mi_sup_source",
    "mi_sup_target",
    "cap_mi",
    "cap_dim",
    "r_povm_mc",
    "r_joint_mc",
    "dst_trace",
    "dst_tv",
    "bound_no_transfer",
    "bound_transfer",
]


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_meta(path: Path, experiment: ExperimentConfig, seed: int, command: str) -> None:
    meta = {
        "command": command,
        "schema": experiment.schema,
        "ansatz": experiment.ansatz_name,
        "grid_resolution": experiment.resolution,
        "grid_points": len(experiment.grid),
        "replications": experiment.replications,
        "master_seed": seed,
    }
    path.write_text(json.dumps(meta, indent=2) + "\n")


def _resolve_out(args, experiment: ExperimentConfig) -> Path:
    out = args.out or experiment.out or "."
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _resolve_threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("QTL_THREADS", "")
    try:
        return int(env) if env else 0
    except ValueError:
        return 0


def run_risk_curve(args) -> int:
    experiment = load_config(args.config)
    if experiment.target_task is None:
        raise ConfigInvalid("field 'target': risk-curve needs an explicit target task")
    seed = args.seed if args.seed is not None else experiment.master_seed
    out = _resolve_out(args, experiment)
    reports = pipeline.replicate(experiment, seed, threads=_resolve_threads(args))
    rows = []
    for r in reports:
        comp = r.components
        if r.n_source == 0:
            terms = [comp["complexity_term"], comp["confidence_term"], 0.0, 0.0, 0.0]
        else:
            terms = [
                comp["target_complexity_term"],
                comp["target_confidence_term"],
                comp["dst_term"],
                comp["source_complexity_term"],
                comp["source_confidence_term"],
            ]
        rows.append(
            [r.n_source, r.n_target, r.replications, r.median, r.q25, r.q75,
             r.excess_raw_mean, r.bound_value] + terms
        )
    csv_path = out / "risk_curve.csv"
    _write_csv(csv_path, RISK_CURVE_HEADER, rows)
    _write_meta(out / "risk_curve_meta.json", experiment, seed, "risk-curve")
    from .plotting import plot_risk_curve

    plot_risk_curve(csv_path, out / "risk_curve.svg")
    print(f"wrote {csv_path} and {out / 'risk_curve.svg'}")
    return 0


def run_shift_sweep(args) -> int:
    experiment = load_config(args.config)
    if not experiment.shifts:
        raise ConfigInvalid("field 'shifts': shift-sweep needs a shift list")
    seed = args.seed if args.seed is not None else experiment.master_seed
    out = _resolve_out(args, experiment)
    reports = pipeline.shift_sweep(experiment, seed, threads=_resolve_threads(args))
    rows = [
        [r.shift, r.median, r.q25, r.q75, r.bound_value, r.dst_trace, r.dst_tv]
        for r in reports
    ]
    csv_path = out / "shift_sweep.csv"
    _write_csv(csv_path, SHIFT_SWEEP_HEADER, rows)
    _write_meta(out / "shift_sweep_meta.json", experiment, seed, "shift-sweep")
    from .plotting import plot_shift_sweep

    plot_shift_sweep(csv_path, out / "shift_sweep.svg")
    print(f"wrote {csv_path} and {out / 'shift_sweep.svg'}")
    return 0


def run_bounds(args) -> int:
    experiment = load_config(args.config)
    if experiment.target_task is None:
        raise ConfigInvalid("field 'target': bounds needs an explicit target task")
    seed = args.seed if args.seed is not None else experiment.master_seed
    out = _resolve_out(args, experiment)
    ansatz, grid = experiment.ansatz, experiment.grid
    source, target = experiment.source_task, experiment.target_task
    states = GridStates(ansatz, grid, target.features)
    pair = divergence.TaskPair(source, target, ansatz)
    mi_sup_s = float(complexity.renyi2_mi_profile(source, ansatz, grid, states).max())
    mi_sup_t = float(complexity.renyi2_mi_profile(target, ansatz, grid, states).max())
    cap_mi = complexity.rademacher_cap_mi(target, ansatz, grid, states)
    cap_dim = complexity.rademacher_cap_dim(ansatz, target)
    d_trace = divergence.dst_trace(pair, grid)
    d_tv = divergence.dst_tv(pair)
    rows = []
    for nt in experiment.n_target:
        est_p, est_j = complexity.rademacher_both(
            target,
            ansatz,
            grid,
            nt,
            outer=experiment.bound.mc_outer,
            sigma_draws=experiment.bound.mc_sigma_draws,
            seed=derive_seed(seed, nt, "bounds-mc"),
            states=states,
        )
        bound_nt, _ = pipeline.bound_no_transfer(
            experiment.bound, target, ansatz, grid, nt, states
        )
        for ns in experiment.n_source:
            if ns == 0:
                bound_tr = math.nan
            else:
                bound_tr, _ = pipeline.bound_transfer(
                    experiment.bound, pair, ansatz, grid, ns, nt, states, states
                )
            rows.append(
                [ns, nt, mi_sup_s, mi_sup_t, cap_mi, cap_dim,
                 est_p.value, est_j.value, d_trace, d_tv, bound_nt, bound_tr]
            )
    csv_path = out / "bounds.csv"
    _write_csv(csv_path, BOUNDS_HEADER, rows)
    _write_meta(out / "bounds_meta.json", experiment, seed, "bounds")
    print(f"wrote {csv_path}")
    return 0


def run_validate_cmd(args) -> int:
    seed = args.seed if args.seed is not None else 0
    results = run_validate(seed)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<{width}}  max violation {r.max_violation:+.3e}")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} property families passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qtl",
        description="Quantum embedding transfer-learning laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = [
        ("risk-curve", run_risk_curve, "replicated excess-risk curves (fig2-style)"),
        ("shift-sweep", run_shift_sweep, "excess risk vs. task mean shift (fig3-style)"),
        ("bounds", run_bounds, "per-term bound table for the sample-size grid"),
        ("validate", run_validate_cmd, "run the cross-module property suite"),
    ]
    for name, func, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        p.add_argument(
            "--config",
            default=None,
            help="config JSON path or preset name (fig2, fig3)",
        )
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument(
            "--threads",
            type=int,
            default=None,
            help="worker processes; 0 = auto (QTL_THREADS env var as fallback)",
        )
        p.set_defaults(func=func)
    args = parser.parse_args(argv)
    if args.command != "validate" and not args.config:
        print("error: --config is required", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QtlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
