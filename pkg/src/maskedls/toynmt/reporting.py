"""Structured text reports for runs and comparisons.

All floating-point values are written with 17 significant digits so that a
re-run from the same resolved config reproduces every file byte-for-byte.
"""

from __future__ import annotations

from .. import metrics as M
from .compare import ExperimentReport
from .evaluate import EvalMetrics, METRIC_NAMES
from .train import TrainReport


def _g(x: float) -> str:
    return f"{x:.17g}"


def format_curves_tsv(report: TrainReport) -> str:
    lines = ["step\ttrain_soft_ce\ttrain_ppl\tdev_soft_ce\tdev_ppl"]
    for i, step in enumerate(report.eval_steps):
        lines.append(
            "\t".join(
                (
                    str(step),
                    _g(report.train_soft_ce[i]),
                    _g(report.train_ppl[i]),
                    _g(report.dev_soft_ce[i]),
                    _g(report.dev_ppl[i]),
                )
            )
        )
    return "\n".join(lines) + "\n"


def format_metrics_report(metrics: EvalMetrics) -> str:
    lines = ["metrics:"]
    for name in METRIC_NAMES:
        lines.append(f"  {name}: {_g(getattr(metrics, name))}")
    return "\n".join(lines) + "\n"


def format_run_report(report: TrainReport, metrics: EvalMetrics | None, seed: int) -> str:
    lines = [
        "run:",
        f"  smoothing: {report.label}",
        f"  seed: {seed}",
        "training:",
        f"  steps: {report.steps}",
        f"  evaluations: {len(report.eval_steps)}",
        f"  final_train_soft_ce: {_g(report.train_soft_ce[-1])}",
        f"  final_train_ppl: {_g(report.train_ppl[-1])}",
        f"  final_dev_ppl: {_g(report.dev_ppl[-1])}",
        f"  source_mass_violations: {report.source_mass_violations}",
        f"  gold_without_share: {report.gold_without_share}",
    ]
    if metrics is not None:
        return "\n".join(lines) + "\n" + format_metrics_report(metrics)
    return "\n".join(lines) + "\n"


def format_experiment_tsv(report: ExperimentReport) -> str:
    lines = ["label\tseed\t" + "\t".join(METRIC_NAMES)]
    for run in report.runs:
        values = "\t".join(_g(getattr(run.metrics, name)) for name in METRIC_NAMES)
        lines.append(f"{run.label}\t{run.seed}\t{values}")
    return "\n".join(lines) + "\n"


def format_experiment_summary(report: ExperimentReport) -> str:
    lines = [
        "comparison:",
        f"  seeds: {','.join(str(s) for s in report.seeds)}",
        f"  baseline: {report.baseline_label or '-'}",
    ]
    for label in report.labels:
        lines.append(f"{label}:")
        for name in METRIC_NAMES:
            lines.append(f"  mean_{name}: {_g(report.mean(label, name))}")
            delta = report.delta_vs_baseline(label, name)
            if delta is not None and label != report.baseline_label:
                lines.append(f"  delta_{name}: {_g(delta)}")
    return "\n".join(lines) + "\n"


def format_calibration(report: M.CalibrationReport) -> str:
    return M.format_calibration_report(report)
