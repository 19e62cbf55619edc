"""Command-line front end: partitioning, distribution inspection, data
generation, training, evaluation, and comparison as reproducible runs.

Exit codes: 0 on success, 2 on usage/config/data errors, 3 when training
diverges.  Every run archives its fully resolved config in the run directory;
no state flows in through environment variables.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import torch

from . import config as C
from . import smoothing as S
from . import vocab as V
from .loss import LossError
from .metrics import MetricsError
from .toynmt import figures, reporting
from .toynmt.compare import compare
from .toynmt.evaluate import EmptyCorpus, evaluate
from .toynmt.model import InvalidConfig, init_model
from .toynmt.synth import InvalidSpec, gen_synthetic, load_corpus, save_corpus
from .toynmt.train import DivergedLoss, train

_USER_ERRORS = (
    V.VocabError,
    S.SmoothingError,
    LossError,
    MetricsError,
    C.ConfigError,
    InvalidSpec,
    InvalidConfig,
    EmptyCorpus,
    OSError,
)


def _prepare_dir(path: Path, force: bool) -> None:
    if path.exists() and any(path.iterdir()):
        if not force:
            raise C.ConfigError(f"output directory {path} is not empty; pass --force to overwrite")
    path.mkdir(parents=True, exist_ok=True)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _special_ids(joint: V.Vocabulary) -> tuple[int, int, int]:
    try:
        return joint.id_of(V.PAD), joint.id_of(V.BOS), joint.id_of(V.EOS)
    except KeyError as exc:
        raise C.ConfigError(f"joint vocabulary lacks special token {exc.args[0]!r}") from None


def cmd_partition(args: argparse.Namespace) -> int:
    joint = V.read_vocab(args.joint)
    src = V.read_vocab(args.src)
    tgt = V.read_vocab(args.tgt)
    special = frozenset(t for t in args.special.split(",") if t) if args.special else frozenset()
    part = V.partition(joint, src, tgt, special=special)
    V.save_partition(part, args.out)
    st = V.stats(part)
    print(f"tokens\t{part.joint.size}")
    for category, count, proportion in zip(
        (V.Category.SOURCE_ONLY, V.Category.COMMON, V.Category.TARGET_ONLY),
        st.counts,
        st.proportions,
    ):
        print(f"{category.label}\t{count}\t{proportion:.6f}")
    print(f"excluded\t{len(part.excluded_ids)}")
    return 0


def cmd_smooth(args: argparse.Namespace) -> int:
    part = V.read_partition(args.partition)
    if args.correct not in part.joint:
        raise C.ConfigError(f"token {args.correct!r} is not in the partition")
    text = args.mode if args.betas is None else f"{args.mode}:{args.betas}"
    spec = C.parse_spec_string(text, args.alpha)
    dist = S.build(spec, part, part.joint.id_of(args.correct))
    sys.stdout.write(S.dump_distribution(dist))
    return 0


def _generate_corpus(cfg: dict, out: Path):
    corpus = gen_synthetic(C.task_spec(cfg))
    save_corpus(corpus, out / "corpus")
    return corpus


def cmd_gen(args: argparse.Namespace) -> int:
    cfg = C.load_config(args.config)
    out = Path(cfg["out_dir"])
    _prepare_dir(out, args.force)
    _write(out / "config.resolved.json", C.dump_config(cfg))
    corpus = _generate_corpus(cfg, out)
    st = V.stats(corpus.partition)
    print(f"corpus written to {out / 'corpus'}")
    print(
        "categories source/common/target: "
        + "/".join(str(c) for c in st.counts)
        + "  proportions: "
        + "/".join(f"{p:.4f}" for p in st.proportions)
    )
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = C.load_config(args.config)
    out = Path(cfg["out_dir"])
    _prepare_dir(out, args.force)
    _write(out / "config.resolved.json", C.dump_config(cfg))
    corpus = _generate_corpus(cfg, out)
    pad_id, bos_id, eos_id = _special_ids(corpus.joint)
    model = init_model(C.model_config(cfg), corpus.joint.size, pad_id, bos_id, eos_id)
    spec = C.smoothing_spec(cfg)
    model, report = train(model, corpus, spec, C.train_config(cfg))
    metrics = evaluate(model, corpus, corpus.partition, cfg["eval_bins"])

    torch.save(model.state_dict(), out / "model.pt")
    _write(out / "curves.tsv", reporting.format_curves_tsv(report))
    _write(out / "report.txt", reporting.format_run_report(report, metrics, cfg["train_seed"]))
    _write(
        out / "calibration_teacher.txt",
        reporting.format_calibration(metrics.teacher_calibration),
    )
    _write(
        out / "calibration_inference.txt",
        reporting.format_calibration(metrics.inference_calibration),
    )
    figdir = out / "figures"
    figdir.mkdir(exist_ok=True)
    figures.save_training_curves(report, figdir / "curves.png")
    figures.save_reliability_diagram(
        metrics.teacher_calibration, figdir / "reliability_teacher.png", "teacher-forced"
    )
    figures.save_reliability_diagram(
        metrics.inference_calibration, figdir / "reliability_inference.png", "inference"
    )
    sys.stdout.write(reporting.format_run_report(report, metrics, cfg["train_seed"]))
    print(f"run written to {out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    run = Path(args.run)
    cfg = C.load_config(run / "config.resolved.json")
    corpus = load_corpus(run / "corpus")
    pad_id, bos_id, eos_id = _special_ids(corpus.joint)
    model = init_model(C.model_config(cfg), corpus.joint.size, pad_id, bos_id, eos_id)
    state = torch.load(run / "model.pt", weights_only=True)
    model.load_state_dict(state)
    bins = args.bins if args.bins is not None else cfg["eval_bins"]
    metrics = evaluate(model, corpus, corpus.partition, bins)

    report_path = run / "eval_report.txt"
    if report_path.exists() and not args.force:
        raise C.ConfigError(f"{report_path} exists; pass --force to overwrite")
    _write(report_path, reporting.format_metrics_report(metrics))
    _write(
        run / "eval_calibration_teacher.txt",
        reporting.format_calibration(metrics.teacher_calibration),
    )
    _write(
        run / "eval_calibration_inference.txt",
        reporting.format_calibration(metrics.inference_calibration),
    )
    figdir = run / "figures"
    figdir.mkdir(exist_ok=True)
    figures.save_reliability_diagram(
        metrics.teacher_calibration, figdir / "eval_reliability_teacher.png", "teacher-forced"
    )
    figures.save_reliability_diagram(
        metrics.inference_calibration, figdir / "eval_reliability_inference.png", "inference"
    )
    sys.stdout.write(reporting.format_metrics_report(metrics))
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = C.load_config(args.config)
    out = Path(cfg["out_dir"])
    _prepare_dir(out, args.force)
    _write(out / "config.resolved.json", C.dump_config(cfg))
    corpus = _generate_corpus(cfg, out)
    specs = C.compare_specs(cfg)
    report = compare(
        corpus,
        specs,
        C.model_config(cfg),
        C.train_config(cfg),
        cfg["compare_seeds"],
        cfg["eval_bins"],
    )

    _write(out / "compare.tsv", reporting.format_experiment_tsv(report))
    _write(out / "summary.txt", reporting.format_experiment_summary(report))
    for run in report.runs:
        rundir = out / "runs" / f"{run.label}-s{run.seed}"
        _write(rundir / "curves.tsv", reporting.format_curves_tsv(run.train_report))
        _write(rundir / "report.txt", reporting.format_run_report(run.train_report, run.metrics, run.seed))
    figdir = out / "figures"
    figdir.mkdir(exist_ok=True)
    figures.save_comparison_bars(report, figdir / "compare_metrics.png")
    figures.save_ppl_curves(report, figdir / "ppl_curves.png")
    sys.stdout.write(reporting.format_experiment_summary(report))
    print(f"comparison written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maskedls",
        description=(
            "Language-aware label smoothing toolkit: vocabulary partitioning, "
            "smoothing distributions, and a deterministic desk-scale trainer."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="partition a joint vocabulary into categories")
    p.add_argument("--joint", required=True, help="joint vocabulary file, one token per line")
    p.add_argument("--src", required=True, help="source vocabulary file")
    p.add_argument("--tgt", required=True, help="target vocabulary file")
    p.add_argument(
        "--special",
        default="",
        help="comma-separated special tokens classified as common (a <pad> among them is excluded from smoothing)",
    )
    p.add_argument("--out", required=True, help="output partition TSV path")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("smooth", help="print one smoothing distribution as a text record")
    p.add_argument("--partition", required=True, help="partition TSV path")
    p.add_argument("--correct", required=True, help="gold token string")
    p.add_argument("--alpha", type=float, default=0.1, help="smoothing mass (default 0.1)")
    p.add_argument(
        "--mode",
        required=True,
        choices=[m.value for m in S.Mode],
        help="distribution builder",
    )
    p.add_argument("--betas", default=None, help="weighted mode only: bt,bc,bs")
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("gen", help="generate a synthetic parallel corpus")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--force", action="store_true", help="overwrite a non-empty output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="generate data, train one model, evaluate, write reports")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--force", action="store_true", help="overwrite a non-empty output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="re-evaluate a finished training run directory")
    p.add_argument("--run", required=True, help="run directory written by `maskedls train`")
    p.add_argument("--bins", type=int, default=None, help="calibration bin count (default: from config)")
    p.add_argument("--force", action="store_true", help="overwrite existing eval reports")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="train a grid of smoothing specs across seeds")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--force", action="store_true", help="overwrite a non-empty output directory")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DivergedLoss as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
