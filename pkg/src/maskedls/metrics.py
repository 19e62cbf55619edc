"""Calibration (expected calibration error) and translation quality metrics.

ECE uses equal-width confidence bins: bin i covers [i/M, (i+1)/M) with the
top bin closed at 1, and the reported score is the sample-weighted mean
absolute gap between each bin's accuracy and its mean confidence.  BLEU is
smoothing-free corpus BLEU over pre-tokenized input with flat n-gram weights;
chrF is the mean character n-gram F-score over orders 1..n with whitespace
removed before n-gram extraction.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Sequence


class MetricsError(ValueError):
    """Base class for metric-computation errors."""


class EmptySamples(MetricsError):
    def __init__(self) -> None:
        super().__init__("no prediction samples given")


class ZeroBins(MetricsError):
    def __init__(self, num_bins: int):
        super().__init__(f"bin count must be >= 1, got {num_bins}")


class LengthMismatch(MetricsError):
    def __init__(self, n_hyp: int, n_ref: int):
        super().__init__(f"{n_hyp} hypotheses but {n_ref} references")


class PredictionSample(NamedTuple):
    confidence: float
    correct: bool


@dataclass(frozen=True)
class BinStats:
    count: int
    mean_confidence: float
    accuracy: float


@dataclass(frozen=True)
class CalibrationReport:
    num_bins: int
    total: int
    bins: tuple[BinStats, ...]
    ece: float


def _bin_index(confidence: float, edges: list[float]) -> int:
    # edges are the interior boundaries i/M for i = 1..M-1; half-open bins
    # [i/M, (i+1)/M) with the final bin closed at 1.
    return bisect_right(edges, confidence)


def ece(samples: Sequence[PredictionSample], num_bins: int) -> CalibrationReport:
    """Bin samples by confidence and report the expected calibration error."""
    if num_bins < 1:
        raise ZeroBins(num_bins)
    if not samples:
        raise EmptySamples()
    for s in samples:
        if not 0.0 <= s.confidence <= 1.0:
            raise MetricsError(f"confidence must be in [0, 1], got {s.confidence}")
    edges = [i / num_bins for i in range(1, num_bins)]
    counts = [0] * num_bins
    conf_sums = [0.0] * num_bins
    correct_counts = [0] * num_bins
    for s in samples:
        i = _bin_index(s.confidence, edges)
        counts[i] += 1
        conf_sums[i] += s.confidence
        correct_counts[i] += int(s.correct)
    total = len(samples)
    bins = []
    score = 0.0
    for c, conf_sum, n_correct in zip(counts, conf_sums, correct_counts):
        if c:
            mean_conf = conf_sum / c
            acc = n_correct / c
            score += (c / total) * abs(acc - mean_conf)
        else:
            mean_conf = 0.0
            acc = 0.0
        bins.append(BinStats(c, mean_conf, acc))
    return CalibrationReport(num_bins, total, tuple(bins), score)


def reliability_table(samples: Sequence[PredictionSample], num_bins: int) -> CalibrationReport:
    """Per-bin counts, mean confidences, and accuracies; same binning as :func:`ece`."""
    return ece(samples, num_bins)


def format_calibration_report(report: CalibrationReport) -> str:
    """Key-value header plus one TSV row per bin."""
    lines = [
        f"num_bins\t{report.num_bins}",
        f"total\t{report.total}",
        f"ece\t{report.ece:.17g}",
        "bin\tlo\thi\tcount\tmean_confidence\taccuracy",
    ]
    for i, b in enumerate(report.bins):
        lo = i / report.num_bins
        hi = (i + 1) / report.num_bins
        lines.append(
            f"{i}\t{lo:.17g}\t{hi:.17g}\t{b.count}\t{b.mean_confidence:.17g}\t{b.accuracy:.17g}"
        )
    return "\n".join(lines) + "\n"


def _ngram_counts(tokens: Sequence, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    hypotheses: Sequence[Sequence[str]],
    references: Sequence[Sequence[str]],
    max_n: int = 4,
) -> float:
    """Corpus BLEU: clipped n-gram precisions (flat weights) times brevity penalty.

    Inputs are pre-tokenized; no smoothing is applied, so a zero precision at
    any order yields 0.  Single reference per hypothesis.
    """
    if len(hypotheses) != len(references):
        raise LengthMismatch(len(hypotheses), len(references))
    if not any(len(r) for r in references):
        raise MetricsError("at least one reference must be non-empty")
    clipped = [0] * max_n
    totals = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            hyp_counts = _ngram_counts(hyp, n)
            if not hyp_counts:
                continue
            ref_counts = _ngram_counts(ref, n)
            clipped[n - 1] += sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
            totals[n - 1] += len(hyp) - n + 1
    if hyp_len == 0:
        return 0.0
    if any(t == 0 or c == 0 for c, t in zip(clipped, totals)):
        return 0.0
    log_prec = sum(math.log(c / t) for c, t in zip(clipped, totals)) / max_n
    brevity = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return brevity * math.exp(log_prec)


def chrf(
    hypotheses: Sequence[Sequence[str]],
    references: Sequence[Sequence[str]],
    n: int = 6,
    beta: float = 2.0,
) -> float:
    """Mean character n-gram F_beta over orders 1..n, spaces removed.

    Precision and recall are corpus-level (n-gram statistics pooled over all
    sentence pairs per order).  Orders with no n-grams on either side are
    skipped; an order with n-grams on exactly one side scores 0.
    """
    if len(hypotheses) != len(references):
        raise LengthMismatch(len(hypotheses), len(references))
    matches = [0] * n
    hyp_totals = [0] * n
    ref_totals = [0] * n
    for hyp, ref in zip(hypotheses, references):
        hyp_chars = "".join(hyp)
        ref_chars = "".join(ref)
        for order in range(1, n + 1):
            hyp_counts = _ngram_counts(hyp_chars, order)
            ref_counts = _ngram_counts(ref_chars, order)
            matches[order - 1] += sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
            hyp_totals[order - 1] += max(len(hyp_chars) - order + 1, 0)
            ref_totals[order - 1] += max(len(ref_chars) - order + 1, 0)
    f_scores = []
    beta_sq = beta * beta
    for m, ht, rt in zip(matches, hyp_totals, ref_totals):
        if ht == 0 and rt == 0:
            continue
        precision = m / ht if ht else 0.0
        recall = m / rt if rt else 0.0
        denom = beta_sq * precision + recall
        f_scores.append((1.0 + beta_sq) * precision * recall / denom if denom > 0.0 else 0.0)
    if not f_scores:
        return 0.0
    return sum(f_scores) / len(f_scores)
