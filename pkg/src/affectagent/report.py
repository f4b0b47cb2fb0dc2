"""CSV and figure emission for sweep and experiment results."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .apps.coach import CoachComparison
from .sweeps import DEFAULT_THRESHOLDS, DynamicCell, StaticCell

COACH_HEADER = (
    "client_identity,policy,mean_interactions,se_interactions,"
    "mean_last_planstep,se_last_planstep,completed,trials"
)

TRACE_HEADER = (
    "step,actor,deflection_agent,deflection_client,"
    "id_deflection_agent,id_deflection_client"
)


def write_csv(path, header: str, rows: list[list]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header.split(","))
        for row in rows:
            writer.writerow(row)
    return path


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_trace_summary(trace, path) -> Path:
    """One CSV row per episode step: the per-agent deflection and identity
    error headline numbers."""
    rows = [
        [
            record.step,
            record.actor,
            _fmt(record.summaries[0]["deflection"]),
            _fmt(record.summaries[1]["deflection"]),
            _fmt(record.summaries[0]["id_deflection"]),
            _fmt(record.summaries[1]["id_deflection"]),
        ]
        for record in trace.records
    ]
    return write_csv(path, TRACE_HEADER, rows)


def emit_static_outputs(cells: list[StaticCell], outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = [
        write_csv(outdir / "static.csv", StaticCell.HEADER, [[_fmt(v) for v in c.row()] for c in cells])
    ]
    if cells:
        paths.append(_plot_static(cells, outdir / "static_id_deflection.png"))
    return paths


def _plot_static(cells: list[StaticCell], path: Path) -> Path:
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    n_values = sorted({c.n_particles for c in cells})
    for idx, (ax, label) in enumerate(zip(axes, ("agent", "client"))):
        for n in n_values:
            pts = sorted(
                [(c.sigma_e, c.id_deflection_mean[idx]) for c in cells if c.n_particles == n]
            )
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"N={n}")
        ax.set_xlabel("environment noise")
        ax.set_title(f"{label} id-deflection (final)")
        ax.grid(alpha=0.3)
    axes[0].set_ylabel("id-deflection")
    axes[0].legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def emit_dynamic_outputs(cells: list[DynamicCell], outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = [
        write_csv(outdir / "dynamic.csv", DynamicCell.HEADER, [[_fmt(v) for v in c.row()] for c in cells])
    ]
    if cells:
        paths.append(_plot_dynamic(cells, outdir / "dynamic_deflected_frames.png"))
    return paths


def _plot_dynamic(cells: list[DynamicCell], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    noises = sorted({c.sigma_e for c in cells})
    for sigma_e in noises:
        for d_m in DEFAULT_THRESHOLDS[:2]:
            pts = sorted(
                [(c.speed, c.deflected_frames[d_m][0]) for c in cells if c.sigma_e == sigma_e]
            )
            ax.plot(
                [p[0] for p in pts],
                [p[1] for p in pts],
                marker="o",
                label=f"noise={sigma_e}, threshold={d_m}",
            )
    ax.set_xlabel("identity shift speed")
    ax.set_ylabel("deflected frames per episode")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def emit_coach_outputs(rows: list[CoachComparison], outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_rows = [
        [
            r.client_identity,
            r.policy,
            _fmt(r.mean_interactions),
            _fmt(r.se_interactions),
            _fmt(r.mean_last_planstep),
            _fmt(r.se_last_planstep),
            r.completed,
            r.trials,
        ]
        for r in rows
    ]
    paths = [write_csv(outdir / "coach_compare.csv", COACH_HEADER, csv_rows)]
    if rows:
        paths.append(_plot_coach(rows, outdir / "coach_compare.png"))
    return paths


def _plot_coach(rows: list[CoachComparison], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    identities = []
    for r in rows:
        if r.client_identity not in identities:
            identities.append(r.client_identity)
    policies = []
    for r in rows:
        if r.policy not in policies:
            policies.append(r.policy)
    width = 0.8 / max(1, len(policies))
    for pi, policy in enumerate(policies):
        xs, ys, errs = [], [], []
        for ii, ident in enumerate(identities):
            match = [r for r in rows if r.policy == policy and r.client_identity == ident]
            if match:
                xs.append(ii + pi * width)
                ys.append(match[0].mean_interactions)
                errs.append(match[0].se_interactions)
        ax.bar(xs, ys, width=width, yerr=errs, capsize=3, label=policy)
    ax.set_xticks(np.arange(len(identities)) + 0.4 - width / 2)
    ax.set_xticklabels(identities)
    ax.set_ylabel("interactions to finish (capped)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
