"""Numerically stable soft-target cross-entropy, its gradient, and perplexity.

All arithmetic is 64-bit; sequence aggregation sums positions in fixed
left-to-right order so results do not depend on how callers parallelize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .smoothing import LabelDistribution


class LossError(ValueError):
    """Base class for loss-computation errors."""


class NonFiniteInput(LossError):
    def __init__(self) -> None:
        super().__init__("logits contain NaN or infinity")


class LengthMismatch(LossError):
    pass


class AllPadded(LossError):
    def __init__(self) -> None:
        super().__init__("every position is padding; nothing to aggregate")


class NegativeInput(LossError):
    def __init__(self, value: float):
        super().__init__(f"mean negative log-likelihood must be >= 0, got {value}")


@dataclass(frozen=True)
class PositionLoss:
    soft_ce: float
    gold_nll: float


@dataclass(frozen=True)
class SequenceLoss:
    mean_soft_ce: float
    mean_gold_nll: float
    token_count: int


def _as_logits(z) -> np.ndarray:
    arr = np.asarray(z, dtype=np.float64)
    if arr.ndim != 1:
        raise LossError(f"logits must be a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput()
    return arr


def softmax(z) -> np.ndarray:
    """Max-subtracted softmax; sums to one, entries positive up to underflow."""
    arr = _as_logits(z)
    e = np.exp(arr - arr.max())
    return e / np.sum(e)


def log_softmax(z) -> np.ndarray:
    """Log-probabilities via log-sum-exp; always finite for finite logits."""
    arr = _as_logits(z)
    shifted = arr - arr.max()
    return shifted - math.log(np.sum(np.exp(shifted)))


def cross_entropy(target: LabelDistribution, z) -> PositionLoss:
    """Cross-entropy of the logits against a soft target, plus gold-token NLL.

    Terms with zero target probability contribute exactly zero and their
    log-probabilities are never multiplied in, so distributions with hard
    zeros (masked smoothing) cannot produce NaN even for extreme logits.
    """
    arr = _as_logits(z)
    probs = target.probs
    if arr.size != probs.size:
        raise LengthMismatch(f"target has {probs.size} entries, logits {arr.size}")
    logp = log_softmax(arr)
    support = probs > 0.0
    soft_ce = float(-np.sum(probs[support] * logp[support]))
    gold_nll = float(-logp[target.correct_id])
    return PositionLoss(soft_ce, gold_nll)


def grad_logits(target: LabelDistribution, z) -> np.ndarray:
    """Gradient of the soft cross-entropy with respect to the logits."""
    arr = _as_logits(z)
    if arr.size != target.probs.size:
        raise LengthMismatch(f"target has {target.probs.size} entries, logits {arr.size}")
    return softmax(arr) - target.probs


def sequence_loss(
    targets: Sequence[LabelDistribution],
    logits: Sequence,
    pad_mask: Sequence[bool],
) -> SequenceLoss:
    """Mean losses over non-pad positions; ``pad_mask[i]`` True means position i is padding."""
    if not (len(targets) == len(logits) == len(pad_mask)):
        raise LengthMismatch(
            f"got {len(targets)} targets, {len(logits)} logit vectors, {len(pad_mask)} mask entries"
        )
    ce_sum = 0.0
    nll_sum = 0.0
    count = 0
    for target, z, is_pad in zip(targets, logits, pad_mask):
        if is_pad:
            continue
        pos = cross_entropy(target, z)
        ce_sum += pos.soft_ce
        nll_sum += pos.gold_nll
        count += 1
    if count == 0:
        raise AllPadded()
    return SequenceLoss(ce_sum / count, nll_sum / count, count)


def perplexity(mean_gold_nll: float) -> float:
    """exp of the mean gold-token negative log-likelihood."""
    if mean_gold_nll < 0.0:
        raise NegativeInput(mean_gold_nll)
    return math.exp(mean_gold_nll)
