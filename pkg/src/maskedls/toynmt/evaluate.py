"""Model evaluation: perplexity, calibration, decode metrics, source mass."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .. import loss as L
from .. import metrics as M
from .. import smoothing as S
from ..vocab import Category, CategoryPartition
from .model import TinyTransformer
from .synth import ParallelCorpus
from .train import TargetTable, encode_pairs, teacher_forced_stats


class EmptyCorpus(ValueError):
    def __init__(self, split: str):
        super().__init__(f"corpus has no {split} pairs")


@dataclass(frozen=True)
class EvalMetrics:
    dev_ppl: float
    test_ppl: float
    teacher_ece: float
    inference_ece: float
    bleu: float
    chrf: float
    mean_source_mass: float
    teacher_calibration: M.CalibrationReport
    inference_calibration: M.CalibrationReport

    def as_dict(self) -> dict[str, float]:
        return {
            "dev_ppl": self.dev_ppl,
            "test_ppl": self.test_ppl,
            "teacher_ece": self.teacher_ece,
            "inference_ece": self.inference_ece,
            "bleu": self.bleu,
            "chrf": self.chrf,
            "mean_source_mass": self.mean_source_mass,
        }


METRIC_NAMES = (
    "dev_ppl",
    "test_ppl",
    "teacher_ece",
    "inference_ece",
    "bleu",
    "chrf",
    "mean_source_mass",
)


def _empty_calibration(num_bins: int) -> M.CalibrationReport:
    bins = tuple(M.BinStats(0, 0.0, 0.0) for _ in range(num_bins))
    return M.CalibrationReport(num_bins, 0, bins, 0.0)


def _teacher_forced_samples(
    model: TinyTransformer,
    corpus: ParallelCorpus,
    source_cols: np.ndarray,
    chunk_size: int = 32,
) -> tuple[list[M.PredictionSample], float]:
    """Confidence/correctness samples and mean source-only mass over dev positions."""
    model.eval()
    samples: list[M.PredictionSample] = []
    mass_sum = 0.0
    with torch.no_grad():
        for start in range(0, len(corpus.dev), chunk_size):
            batch = corpus.dev[start : start + chunk_size]
            src, tgt_in, gold = encode_pairs(
                batch, corpus.joint, model.pad_id, model.bos_id, model.eos_id
            )
            logits = model(src, tgt_in).numpy()
            gold_np = gold.numpy()
            for b in range(gold_np.shape[0]):
                for pos in range(gold_np.shape[1]):
                    g = int(gold_np[b, pos])
                    if g == model.pad_id:
                        continue
                    probs = L.softmax(logits[b, pos])
                    pred = int(np.argmax(probs))
                    samples.append(M.PredictionSample(float(probs[pred]), pred == g))
                    if source_cols.size:
                        mass_sum += float(np.sum(probs[source_cols]))
    return samples, (mass_sum / len(samples) if samples else 0.0)


def _decode_with_samples(
    model: TinyTransformer,
    src_tokens: tuple[str, ...],
    ref_tokens: tuple[str, ...],
    corpus: ParallelCorpus,
) -> tuple[list[str], list[M.PredictionSample]]:
    """Greedy decode collecting per-step confidence and position-wise correctness.

    Correctness compares the emitted token against the reference at the same
    position, up to the shorter length; steps past the reference end yield no
    sample.
    """
    joint = corpus.joint
    max_len = min(len(src_tokens) + 5, model.cfg.max_positions - 1)
    src = torch.tensor(
        [[joint.id_of(t) for t in src_tokens] + [model.eos_id]], dtype=torch.long
    )
    samples: list[M.PredictionSample] = []
    hyp: list[str] = []
    with torch.no_grad():
        memory, mem_pad_mask = model.encode(src)
        ids = [model.bos_id]
        for _ in range(max_len):
            tgt_in = torch.tensor([ids], dtype=torch.long)
            logits = model.decode(memory, mem_pad_mask, tgt_in)
            probs = L.softmax(logits[0, -1].numpy())
            next_id = int(np.argmax(probs))
            if next_id == model.eos_id:
                break
            position = len(hyp)
            if position < len(ref_tokens):
                samples.append(
                    M.PredictionSample(float(probs[next_id]), joint.tokens[next_id] == ref_tokens[position])
                )
            hyp.append(joint.tokens[next_id])
            ids.append(next_id)
    return hyp, samples


def evaluate(
    model: TinyTransformer,
    corpus: ParallelCorpus,
    partition: CategoryPartition,
    num_bins: int = 10,
) -> EvalMetrics:
    """Dev/test perplexity, teacher-forced and inference calibration, BLEU/chrF,
    and the mean predicted probability mass on source-only tokens."""
    if not corpus.dev:
        raise EmptyCorpus("dev")
    if not corpus.test:
        raise EmptyCorpus("test")
    torch.set_num_threads(1)
    model.eval()
    onehot_table = TargetTable(S.SmoothingSpec(S.Mode.ONE_HOT, alpha=0.0), partition)
    dev_stats = teacher_forced_stats(model, corpus.dev, corpus.joint, onehot_table)
    test_stats = teacher_forced_stats(model, corpus.test, corpus.joint, onehot_table)

    source_cols = partition.ids(Category.SOURCE_ONLY, include_excluded=True)
    tf_samples, mean_source_mass = _teacher_forced_samples(model, corpus, source_cols)
    teacher_report = M.ece(tf_samples, num_bins)

    inf_samples: list[M.PredictionSample] = []
    hypotheses: list[list[str]] = []
    references: list[list[str]] = []
    for src_tokens, ref_tokens in corpus.dev:
        hyp, samples = _decode_with_samples(model, src_tokens, ref_tokens, corpus)
        hypotheses.append(hyp)
        references.append(list(ref_tokens))
        inf_samples.extend(samples)
    inference_report = M.ece(inf_samples, num_bins) if inf_samples else _empty_calibration(num_bins)

    return EvalMetrics(
        dev_ppl=L.perplexity(dev_stats.mean_gold_nll),
        test_ppl=L.perplexity(test_stats.mean_gold_nll),
        teacher_ece=teacher_report.ece,
        inference_ece=inference_report.ece,
        bleu=M.bleu(hypotheses, references),
        chrf=M.chrf(hypotheses, references),
        mean_source_mass=mean_source_mass,
        teacher_calibration=teacher_report,
        inference_calibration=inference_report,
    )
