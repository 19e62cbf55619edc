"""Synthetic bilingual corpora with a controlled vocabulary Venn structure.

Each task fixes three token inventories (source-only, common, target-only)
and a hidden injective mapping from source-only tokens to distinct
target-only tokens.  A sentence position is, with a configured probability,
a common token copied verbatim to both sides; otherwise it is a source-only
token paired with its mapped target token.  The task is therefore a learnable
token-wise translation whose joint-vocabulary partition is known by
construction.  An optional second pair (fresh source-only inventory, shared
common and target-only inventories) concatenates into a multilingual corpus.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import vocab as V

Pair = tuple[tuple[str, ...], tuple[str, ...]]


class InvalidSpec(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticTaskSpec:
    n_source_only: int = 10
    n_common: int = 4
    n_target_only: int = 10
    sentence_length_range: tuple[int, int] = (4, 9)
    pair_counts: tuple[int, int, int] = (320, 48, 48)
    common_token_rate: float = 0.3
    seed: int = 0
    second_pair: "SyntheticTaskSpec | None" = None

    def __post_init__(self) -> None:
        lo, hi = self.sentence_length_range
        if self.n_target_only < 1:
            raise InvalidSpec("need at least one target-only token")
        if self.n_source_only < 0 or self.n_common < 0:
            raise InvalidSpec("inventory sizes must be non-negative")
        if self.n_source_only > self.n_target_only:
            raise InvalidSpec(
                "source-only tokens must map to distinct target-only tokens; "
                f"{self.n_source_only} > {self.n_target_only}"
            )
        if not 1 <= lo <= hi:
            raise InvalidSpec(f"bad sentence length range {self.sentence_length_range}")
        if any(c < 1 for c in self.pair_counts):
            raise InvalidSpec(f"every split needs at least one pair, got {self.pair_counts}")
        if not 0.0 <= self.common_token_rate <= 1.0:
            raise InvalidSpec(f"common_token_rate must be in [0, 1], got {self.common_token_rate}")
        if self.common_token_rate < 1.0 and self.n_source_only == 0:
            raise InvalidSpec("no source-only tokens: common_token_rate must be 1.0")
        if self.common_token_rate > 0.0 and self.n_common == 0:
            raise InvalidSpec("no common tokens: common_token_rate must be 0.0")
        if self.second_pair is not None:
            sp = self.second_pair
            if sp.second_pair is not None:
                raise InvalidSpec("second_pair must not nest further")
            if sp.n_common != self.n_common or sp.n_target_only != self.n_target_only:
                raise InvalidSpec(
                    "the second pair shares the common and target-only inventories; "
                    "its n_common and n_target_only must match the first pair"
                )


@dataclass(frozen=True)
class ParallelCorpus:
    train: tuple[Pair, ...]
    dev: tuple[Pair, ...]
    test: tuple[Pair, ...]
    src_vocab: V.Vocabulary
    tgt_vocab: V.Vocabulary
    joint: V.Vocabulary
    partition: V.CategoryPartition

    def __post_init__(self) -> None:
        for split in (self.train, self.dev, self.test):
            for src, tgt in split:
                for tok in src:
                    if tok not in self.src_vocab:
                        raise InvalidSpec(f"source token {tok!r} not in source vocabulary")
                for tok in tgt:
                    if tok not in self.tgt_vocab:
                        raise InvalidSpec(f"target token {tok!r} not in target vocabulary")

    @property
    def pairs(self) -> tuple[Pair, ...]:
        return self.train + self.dev + self.test


def _token_range(prefix: str, count: int) -> list[str]:
    width = max(2, len(str(max(count - 1, 0))))
    return [f"{prefix}{i:0{width}d}" for i in range(count)]


def _draw_split(
    rng: np.random.Generator,
    count: int,
    spec: SyntheticTaskSpec,
    source_tokens: list[str],
    common_tokens: list[str],
    mapped: dict[str, str],
) -> tuple[Pair, ...]:
    lo, hi = spec.sentence_length_range
    pairs = []
    for _ in range(count):
        length = int(rng.integers(lo, hi + 1))
        src = []
        tgt = []
        for _ in range(length):
            if spec.common_token_rate > 0.0 and rng.random() < spec.common_token_rate:
                tok = common_tokens[int(rng.integers(len(common_tokens)))]
                src.append(tok)
                tgt.append(tok)
            else:
                tok = source_tokens[int(rng.integers(len(source_tokens)))]
                src.append(tok)
                tgt.append(mapped[tok])
        pairs.append((tuple(src), tuple(tgt)))
    return tuple(pairs)


def _pair_splits(
    spec: SyntheticTaskSpec,
    source_tokens: list[str],
    common_tokens: list[str],
    target_tokens: list[str],
) -> tuple[tuple[Pair, ...], tuple[Pair, ...], tuple[Pair, ...]]:
    children = np.random.SeedSequence(spec.seed).spawn(4)
    map_rng = np.random.Generator(np.random.PCG64(children[0]))
    perm = map_rng.permutation(len(target_tokens))[: len(source_tokens)]
    mapped = {s: target_tokens[int(j)] for s, j in zip(source_tokens, perm)}
    splits = []
    for count, child in zip(spec.pair_counts, children[1:]):
        rng = np.random.Generator(np.random.PCG64(child))
        splits.append(_draw_split(rng, count, spec, source_tokens, common_tokens, mapped))
    return tuple(splits)


def gen_synthetic(spec: SyntheticTaskSpec) -> ParallelCorpus:
    """Build a corpus whose joint-vocabulary partition matches the spec by construction."""
    source_tokens = _token_range("s", spec.n_source_only)
    common_tokens = _token_range("c", spec.n_common)
    target_tokens = _token_range("t", spec.n_target_only)
    train, dev, test = _pair_splits(spec, source_tokens, common_tokens, target_tokens)

    source2_tokens: list[str] = []
    if spec.second_pair is not None:
        sp = spec.second_pair
        source2_tokens = _token_range("u", sp.n_source_only)
        train2, dev2, test2 = _pair_splits(sp, source2_tokens, common_tokens, target_tokens)
        train, dev, test = train + train2, dev + dev2, test + test2

    src_vocab = V.Vocabulary(tuple(source_tokens + source2_tokens + common_tokens))
    tgt_vocab = V.Vocabulary(tuple(common_tokens + target_tokens))
    joint = V.Vocabulary(
        tuple(list(V.DEFAULT_SPECIALS) + source_tokens + source2_tokens + common_tokens + target_tokens)
    )
    part = V.partition(joint, src_vocab, tgt_vocab, special=frozenset(V.DEFAULT_SPECIALS))
    return ParallelCorpus(train, dev, test, src_vocab, tgt_vocab, joint, part)


def _write_split(pairs: tuple[Pair, ...], directory: Path, name: str) -> None:
    src_lines = "\n".join(" ".join(src) for src, _ in pairs) + "\n"
    tgt_lines = "\n".join(" ".join(tgt) for _, tgt in pairs) + "\n"
    (directory / f"{name}.src").write_text(src_lines, encoding="utf-8")
    (directory / f"{name}.tgt").write_text(tgt_lines, encoding="utf-8")


def _read_split(directory: Path, name: str) -> tuple[Pair, ...]:
    src_lines = (directory / f"{name}.src").read_text(encoding="utf-8").splitlines()
    tgt_lines = (directory / f"{name}.tgt").read_text(encoding="utf-8").splitlines()
    if len(src_lines) != len(tgt_lines):
        raise InvalidSpec(f"{name}: {len(src_lines)} source lines but {len(tgt_lines)} target lines")
    return tuple(
        (tuple(s.split()), tuple(t.split())) for s, t in zip(src_lines, tgt_lines)
    )


def save_corpus(corpus: ParallelCorpus, directory: str | Path) -> None:
    """Write parallel text, vocabularies, and the partition to a directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, split in (("train", corpus.train), ("dev", corpus.dev), ("test", corpus.test)):
        _write_split(split, directory, name)
    V.save_vocab(corpus.src_vocab, directory / "src.vocab")
    V.save_vocab(corpus.tgt_vocab, directory / "tgt.vocab")
    V.save_vocab(corpus.joint, directory / "joint.vocab")
    V.save_partition(corpus.partition, directory / "partition.tsv")


def load_corpus(directory: str | Path) -> ParallelCorpus:
    directory = Path(directory)
    return ParallelCorpus(
        _read_split(directory, "train"),
        _read_split(directory, "dev"),
        _read_split(directory, "test"),
        V.read_vocab(directory / "src.vocab"),
        V.read_vocab(directory / "tgt.vocab"),
        V.read_vocab(directory / "joint.vocab"),
        V.read_partition(directory / "partition.tsv"),
    )
