"""Matplotlib renderings of run reports, written next to the delimited output.

Figures are a convenience view; the TSV/text reports stay the machine-readable
source of truth (and the only artifacts covered by the bit-exactness
guarantee).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .. import metrics as M
from .compare import ExperimentReport
from .train import TrainReport


def save_training_curves(report: TrainReport, path: str | Path) -> None:
    """Soft-CE and perplexity curves for one run."""
    fig, (ax_ce, ax_ppl) = plt.subplots(1, 2, figsize=(9, 3.5))
    steps = report.eval_steps
    ax_ce.plot(steps, report.train_soft_ce, label="train")
    ax_ce.plot(steps, report.dev_soft_ce, label="dev")
    ax_ce.set_xlabel("step")
    ax_ce.set_ylabel("soft cross-entropy")
    ax_ce.legend()
    ax_ppl.plot(steps, report.train_ppl, label="train")
    ax_ppl.plot(steps, report.dev_ppl, label="dev")
    ax_ppl.set_xlabel("step")
    ax_ppl.set_ylabel("gold-NLL perplexity")
    ax_ppl.set_yscale("log")
    ax_ppl.legend()
    fig.suptitle(report.label)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_reliability_diagram(report: M.CalibrationReport, path: str | Path, title: str = "") -> None:
    """Accuracy-vs-confidence bars over the equal-width confidence bins."""
    fig, ax = plt.subplots(figsize=(4.5, 4))
    width = 1.0 / report.num_bins
    centers = [(i + 0.5) * width for i in range(report.num_bins)]
    accuracies = [b.accuracy for b in report.bins]
    confidences = [b.mean_confidence for b in report.bins]
    ax.bar(centers, accuracies, width=width * 0.9, label="accuracy", color="tab:blue")
    ax.plot(centers, confidences, "o-", color="tab:red", label="mean confidence")
    ax.plot([0, 1], [0, 1], "--", color="gray", linewidth=1)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel("confidence")
    ax.set_ylabel("accuracy")
    ax.set_title(f"{title} (ECE {report.ece:.4f})".strip())
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_comparison_bars(report: ExperimentReport, path: str | Path) -> None:
    """Per-spec means with per-seed points for the headline metrics."""
    metric_keys = ("bleu", "dev_ppl", "inference_ece", "mean_source_mass")
    fig, axes = plt.subplots(1, len(metric_keys), figsize=(3.4 * len(metric_keys), 3.6))
    positions = range(len(report.labels))
    for ax, metric in zip(axes, metric_keys):
        means = [report.mean(label, metric) for label in report.labels]
        ax.bar(positions, means, color="tab:blue", alpha=0.6)
        for x, label in zip(positions, report.labels):
            values = report.per_seed(label, metric)
            ax.plot([x] * len(values), values, "k.", markersize=4)
        ax.set_xticks(list(positions))
        ax.set_xticklabels(report.labels, rotation=30, ha="right", fontsize=7)
        ax.set_title(metric, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_ppl_curves(report: ExperimentReport, path: str | Path) -> None:
    """Train-perplexity trajectories per spec (one line per seed)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, label in enumerate(report.labels):
        color = colors[i % len(colors)]
        first = True
        for run in report.runs:
            if run.label != label:
                continue
            tr = run.train_report
            ax.plot(
                tr.eval_steps,
                tr.train_ppl,
                color=color,
                alpha=0.7,
                label=label if first else None,
            )
            first = False
    ax.set_xlabel("step")
    ax.set_ylabel("train gold-NLL perplexity")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
