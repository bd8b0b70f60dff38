"""Static SVG figures rendered from the CSV outputs alone.

Plotting deliberately consumes only the delimited files, never in-memory
results, so every figure can be regenerated after the fact from the CSV
it sits next to.
"""

from __future__ import annotations

import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _read_rows(csv_path) -> list[dict]:
    with open(csv_path, newline="") as fh:
        return [
            {k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)
        ]


def plot_risk_curve(csv_path, svg_path) -> None:
    """Median transfer excess risk (with IQR bands) and bound, per n_source."""
    rows = _read_rows(csv_path)
    series = defaultdict(list)
    for row in rows:
        series[int(row["n_source"])].append(row)
    fig, (ax_risk, ax_bound) = plt.subplots(
        2, 1, figsize=(7, 7), sharex=True, constrained_layout=True
    )
    for ns in sorted(series):
        cells = sorted(series[ns], key=lambda r: r["n_target"])
        nt = [c["n_target"] for c in cells]
        label = f"$N^S = {ns}$"
        ax_risk.plot(nt, [c["median"] for c in cells], marker="o", label=label)
        ax_risk.fill_between(
            nt, [c["q25"] for c in cells], [c["q75"] for c in cells], alpha=0.2
        )
        ax_bound.plot(nt, [c["bound_value"] for c in cells], marker="s", label=label)
    ax_risk.set_ylabel("median excess risk")
    ax_risk.set_xscale("log", base=2)
    ax_risk.legend()
    ax_risk.grid(True, alpha=0.3)
    ax_bound.set_ylabel("excess-risk bound")
    ax_bound.set_xlabel("target-task samples $N^T$")
    ax_bound.grid(True, alpha=0.3)
    fig.savefig(svg_path, format="svg")
    plt.close(fig)


def plot_shift_sweep(csv_path, svg_path) -> None:
    """Median excess risk and bound as the target means shift off the source."""
    rows = sorted(_read_rows(csv_path), key=lambda r: r["shift"])
    shift = [r["shift"] for r in rows]
    fig, (ax_risk, ax_bound) = plt.subplots(
        2, 1, figsize=(7, 7), sharex=True, constrained_layout=True
    )
    ax_risk.plot(shift, [r["median"] for r in rows], marker="o", color="C0")
    ax_risk.fill_between(
        shift, [r["q25"] for r in rows], [r["q75"] for r in rows],
        alpha=0.2, color="C0",
    )
    ax_risk.set_ylabel("median excess risk")
    ax_risk.grid(True, alpha=0.3)
    ax_bound.plot(shift, [r["bound_value"] for r in rows], marker="s", color="C1",
                  label="bound")
    ax_bound.plot(shift, [r["dst_trace"] for r in rows], ls="--", color="C2",
                  label="trace dissimilarity")
    ax_bound.plot(shift, [r["dst_tv"] for r in rows], ls=":", color="C3",
                  label="TV dissimilarity")
    ax_bound.set_ylabel("bound / dissimilarity")
    ax_bound.set_xlabel("target mean shift")
    ax_bound.legend()
    ax_bound.grid(True, alpha=0.3)
    fig.savefig(svg_path, format="svg")
    plt.close(fig)
