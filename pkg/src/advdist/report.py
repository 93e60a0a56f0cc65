"""Result persistence: delimited records plus rendered figures."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .evaluation import EvaluationReport, TradeoffRow

RECORD_COLUMNS = [
    "index",
    "true_label",
    "predicted_label",
    "initially_correct",
    "distance_alg1",
    "distance_second",
    "distance_min",
    "winner",
    "clever_score",
    "clever_valid",
]

_WINNER_COLORS = {
    "alg1": "tab:blue",
    "second": "tab:orange",
    "both_failed": "tab:gray",
    "misclassified": "black",
}


def fmt_value(value) -> str:
    """CSV field formatting: empty for absent, 17 significant digits for floats."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)



def write_report(
    report: EvaluationReport,
    out_dir: str | Path,
    tradeoff_rows: list[TradeoffRow] | None = None,
) -> list[Path]:
    """Write records.csv, summary.csv, and the distance figure into out_dir.

    Absent values become empty CSV fields; floats carry 17 significant digits
    so parsing the file reproduces them exactly. A trade-off figure and table
    are added when study rows are supplied. Returns the written paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    records_path = out / "records.csv"
    with open(records_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_COLUMNS)
        for r in report.records:
            writer.writerow(
                [
                    fmt_value(r.index),
                    fmt_value(r.true_label),
                    fmt_value(r.predicted_label),
                    fmt_value(r.initially_correct),
                    fmt_value(r.distance_alg1),
                    fmt_value(r.distance_second),
                    fmt_value(r.distance_min),
                    r.winner,
                    fmt_value(r.clever_score),
                    fmt_value(r.clever_valid),
                ]
            )
    written.append(records_path)

    summary_path = out / "summary.csv"
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        writer.writerow(["norm", f"L{report.norm.value}"])
        writer.writerow(["mean_adversarial_distance", fmt_value(report.mean_adversarial_distance)])
        for eps, acc in report.adversarial_accuracy_at.items():
            writer.writerow([f"adversarial_accuracy@{fmt_value(float(eps))}", fmt_value(acc)])
        writer.writerow(["clever_error_ratio", fmt_value(report.clever_error_ratio)])
        writer.writerow(["clever_radius", fmt_value(report.clever_radius)])
        for phase, seconds in report.runtime.items():
            writer.writerow([f"runtime_{phase}_s", fmt_value(seconds)])
        writer.writerow(["n_records", fmt_value(len(report.records))])
        writer.writerow(
            ["n_misclassified", fmt_value(sum(1 for r in report.records if not r.initially_correct))]
        )
        writer.writerow(
            ["n_both_failed", fmt_value(sum(1 for r in report.records if r.winner == "both_failed"))]
        )
        writer.writerow(["all_attacks_failed", fmt_value(report.all_attacks_failed)])
    written.append(summary_path)

    written.append(_distances_figure(report, out / "distances.svg"))
    if tradeoff_rows:
        written.extend(write_tradeoff(tradeoff_rows, out))
    return written


def write_tradeoff(rows: list[TradeoffRow], out_dir: str | Path) -> list[Path]:
    """Write the step-size sweep as tradeoff.csv plus its figure."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [_tradeoff_table(rows, out / "tradeoff.csv"), _tradeoff_figure(rows, out / "tradeoff.svg")]


def _distances_figure(report: EvaluationReport, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    ranks = range(len(report.records))
    distances = [r.distance_min for r in report.records]
    ax.plot(ranks, distances, color="0.8", lw=0.8, zorder=1)
    for winner, color in _WINNER_COLORS.items():
        pts = [(i, r.distance_min) for i, r in enumerate(report.records) if r.winner == winner]
        if pts:
            ax.scatter(*zip(*pts), s=12, color=color, label=winner.replace("_", " "), zorder=2)
    valid = [(i, r.clever_score) for i, r in enumerate(report.records) if r.clever_valid]
    invalid = [
        (i, r.clever_score)
        for i, r in enumerate(report.records)
        if r.clever_score is not None and not r.clever_valid
    ]
    if valid:
        ax.scatter(*zip(*valid), s=14, marker="x", color="tab:green", label="lower bound (valid)")
    if invalid:
        ax.scatter(*zip(*invalid), s=14, marker="x", color="tab:red", label="lower bound (invalid)")
    ax.set_xlabel("images, sorted by adversarial distance")
    ax.set_ylabel(f"L{report.norm.value} distance")
    ax.legend(fontsize=8, loc="upper left")
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    return path


def _tradeoff_table(rows: list[TradeoffRow], path: Path) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["eps_step", "mean_distance", "runtime_s"])
        for row in rows:
            writer.writerow([fmt_value(row.eps_step), fmt_value(row.mean_distance), fmt_value(row.runtime_s)])
    return path


def _tradeoff_figure(rows: list[TradeoffRow], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    steps = [r.eps_step for r in rows]
    ax.plot(steps, [r.mean_distance for r in rows], "o-", color="tab:blue")
    ax.set_xscale("log")
    ax.invert_xaxis()
    ax.set_xlabel("step size")
    ax.set_ylabel("mean adversarial distance", color="tab:blue")
    twin = ax.twinx()
    twin.plot(steps, [r.runtime_s for r in rows], "s--", color="tab:red")
    twin.set_ylabel("runtime [s]", color="tab:red")
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    return path
