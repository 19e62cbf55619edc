"""Deterministic teacher-forced training under any smoothing spec.

Data order, dropout, and parameter init are all keyed by explicit seeds, so a
run is a pure function of (corpus, configs, seeds): repeating it reproduces
every recorded number bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch

from .. import loss as L
from .. import smoothing as S
from ..vocab import Category, CategoryPartition, Vocabulary
from .model import InvalidConfig, TinyTransformer
from .synth import Pair, ParallelCorpus


class DivergedLoss(RuntimeError):
    def __init__(self, step: int):
        self.step = step
        super().__init__(f"training loss became non-finite at step {step}")


@dataclass(frozen=True)
class TrainConfig:
    # Toy-scale defaults.  The corresponding full-scale recipe would be
    # lr 7e-4 with 1000 warmup steps from an initial 1e-7, Adam (0.9, 0.98),
    # dropout 0.3, and weight decay 1e-4; none of that is affordable here.
    lr: float = 3e-3
    warmup_steps: int = 200
    max_steps: int = 1200
    batch_tokens: int = 256
    eval_interval: int = 40
    adam_betas: tuple[float, float] = (0.9, 0.98)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lr <= 0.0:
            raise InvalidConfig(f"learning rate must be positive, got {self.lr}")
        if not 1 <= self.warmup_steps <= self.max_steps:
            raise InvalidConfig(
                f"need 1 <= warmup_steps <= max_steps, got {self.warmup_steps}/{self.max_steps}"
            )
        if self.batch_tokens < 2:
            raise InvalidConfig(f"batch_tokens must be >= 2, got {self.batch_tokens}")
        if self.eval_interval < 1:
            raise InvalidConfig(f"eval_interval must be >= 1, got {self.eval_interval}")


@dataclass(frozen=True)
class TrainReport:
    label: str
    steps: int
    eval_steps: tuple[int, ...]
    train_soft_ce: tuple[float, ...]
    train_ppl: tuple[float, ...]
    dev_soft_ce: tuple[float, ...]
    dev_ppl: tuple[float, ...]
    source_mass_violations: int
    gold_without_share: int


def learning_rate(tc: TrainConfig, step: int) -> float:
    """Linear warmup to the peak, then inverse-square-root decay."""
    if step <= tc.warmup_steps:
        return tc.lr * step / tc.warmup_steps
    return tc.lr * (tc.warmup_steps / step) ** 0.5


class TargetTable:
    """Per-gold-token target distributions for a fixed spec and partition.

    Distributions depend only on the gold id, so each one is built once via
    the smoothing module and reused.
    """

    def __init__(self, spec: S.SmoothingSpec, partition: CategoryPartition):
        self.spec = spec
        self.partition = partition
        self._dists: dict[int, S.LabelDistribution] = {}

    def dist(self, gold_id: int) -> S.LabelDistribution:
        if gold_id not in self._dists:
            self._dists[gold_id] = S.build(self.spec, self.partition, gold_id)
        return self._dists[gold_id]

    def row(self, gold_id: int) -> np.ndarray:
        return self.dist(gold_id).probs


def encode_pairs(
    pairs: Sequence[Pair],
    joint: Vocabulary,
    pad_id: int = 0,
    bos_id: int = 1,
    eos_id: int = 2,
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """(src, tgt_in, gold) long tensors, right-padded; source gets a trailing EOS."""
    src_rows = [[joint.id_of(t) for t in src] + [eos_id] for src, _ in pairs]
    gold_rows = [[joint.id_of(t) for t in tgt] + [eos_id] for _, tgt in pairs]
    tgt_in_rows = [[bos_id] + row[:-1] for row in gold_rows]

    def pad_to(rows: list[list[int]]) -> torch.Tensor:
        width = max(len(r) for r in rows)
        return torch.tensor([r + [pad_id] * (width - len(r)) for r in rows], dtype=torch.long)

    return pad_to(src_rows), pad_to(tgt_in_rows), pad_to(gold_rows)


def teacher_forced_stats(
    model: TinyTransformer,
    pairs: Sequence[Pair],
    joint: Vocabulary,
    table: TargetTable,
    chunk_size: int = 32,
) -> L.SequenceLoss:
    """Loss-module aggregation over all gold-prefixed positions, in input order."""
    model.eval()
    targets: list[S.LabelDistribution] = []
    logit_rows: list[np.ndarray] = []
    with torch.no_grad():
        for start in range(0, len(pairs), chunk_size):
            batch = pairs[start : start + chunk_size]
            src, tgt_in, gold = encode_pairs(batch, joint, model.pad_id, model.bos_id, model.eos_id)
            logits = model(src, tgt_in).numpy()
            gold_np = gold.numpy()
            for b in range(gold_np.shape[0]):
                for pos in range(gold_np.shape[1]):
                    g = int(gold_np[b, pos])
                    if g == model.pad_id:
                        continue
                    targets.append(table.dist(g))
                    logit_rows.append(logits[b, pos])
    pad_mask = [False] * len(targets)
    return L.sequence_loss(targets, logit_rows, pad_mask)


def _token_batches(order: np.ndarray, pairs: Sequence[Pair], budget: int) -> list[list[int]]:
    batches: list[list[int]] = []
    current: list[int] = []
    used = 0
    for idx in order:
        need = len(pairs[idx][1]) + 1
        if current and used + need > budget:
            batches.append(current)
            current = []
            used = 0
        current.append(int(idx))
        used += need
    if current:
        batches.append(current)
    return batches


def _epoch_order(seed: int, epoch: int, n: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, epoch])))
    return rng.permutation(n)


def train(
    model: TinyTransformer,
    corpus: ParallelCorpus,
    smoothing: S.SmoothingSpec,
    tc: TrainConfig,
) -> tuple[TinyTransformer, TrainReport]:
    """Teacher-forced training minimizing mean soft cross-entropy.

    Padding positions are masked out of the loss; curves are recorded every
    ``eval_interval`` steps (plus step 0 and the final step) on a fixed train
    subset and the dev split.  During masked-mode training every constructed
    target is checked online for zero source-only mass.
    """
    torch.set_num_threads(1)
    if not corpus.train:
        raise InvalidConfig("corpus has no training pairs")
    table = TargetTable(smoothing, corpus.partition)
    # Probe with a real gold id so invalid specs fail before any training.
    table.dist(corpus.joint.id_of(corpus.train[0][1][0]))

    model.dropout_state.seed = tc.seed
    optimizer = torch.optim.Adam(model.parameters(), lr=tc.lr, betas=tc.adam_betas)
    size = corpus.joint.size
    pad_id = model.pad_id
    pad_row = S.one_hot(size, pad_id).probs
    source_cols = corpus.partition.ids(Category.SOURCE_ONLY, include_excluded=True)
    train_eval_pairs = corpus.train[: min(len(corpus.train), 48)]
    diagnostics_before = S.diagnostics.gold_without_share

    eval_steps: list[int] = []
    train_ce: list[float] = []
    train_ppl: list[float] = []
    dev_ce: list[float] = []
    dev_ppl: list[float] = []

    def record(step: int) -> None:
        tr = teacher_forced_stats(model, train_eval_pairs, corpus.joint, table)
        dv = teacher_forced_stats(model, corpus.dev, corpus.joint, table)
        eval_steps.append(step)
        train_ce.append(tr.mean_soft_ce)
        train_ppl.append(L.perplexity(tr.mean_gold_nll))
        dev_ce.append(dv.mean_soft_ce)
        dev_ppl.append(L.perplexity(dv.mean_gold_nll))

    record(0)
    step = 0
    epoch = 0
    source_mass_violations = 0
    while step < tc.max_steps:
        order = _epoch_order(tc.seed, epoch, len(corpus.train))
        for batch_indices in _token_batches(order, corpus.train, tc.batch_tokens):
            if step >= tc.max_steps:
                break
            step += 1
            model.train()
            model.dropout_state.step = step
            batch = [corpus.train[i] for i in batch_indices]
            src, tgt_in, gold = encode_pairs(batch, corpus.joint, pad_id, model.bos_id, model.eos_id)
            gold_np = gold.numpy()
            rows = np.empty((*gold_np.shape, size), dtype=np.float64)
            for b in range(gold_np.shape[0]):
                for pos in range(gold_np.shape[1]):
                    g = int(gold_np[b, pos])
                    rows[b, pos] = pad_row if g == pad_id else table.row(g)
            if smoothing.mode is S.Mode.MASKED and source_cols.size:
                if rows[:, :, source_cols].any():
                    source_mass_violations += 1

            logits = model(src, tgt_in)
            logp = torch.log_softmax(logits, dim=-1)
            ce = -(torch.from_numpy(rows) * logp).sum(-1)
            batch_loss = ce[gold != pad_id].mean()
            if not torch.isfinite(batch_loss):
                raise DivergedLoss(step)
            lr = learning_rate(tc, step)
            for group in optimizer.param_groups:
                group["lr"] = lr
            optimizer.zero_grad()
            batch_loss.backward()
            optimizer.step()
            if step % tc.eval_interval == 0:
                record(step)
        epoch += 1
    if eval_steps[-1] != step:
        record(step)

    report = TrainReport(
        label=smoothing.label(),
        steps=step,
        eval_steps=tuple(eval_steps),
        train_soft_ce=tuple(train_ce),
        train_ppl=tuple(train_ppl),
        dev_soft_ce=tuple(dev_ce),
        dev_ppl=tuple(dev_ppl),
        source_mass_violations=source_mass_violations,
        gold_without_share=S.diagnostics.gold_without_share - diagnostics_before,
    )
    return model, report
