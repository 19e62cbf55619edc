"""Joint-vocabulary handling and source/common/target category partitioning.

A shared (joint) vocabulary for a language pair splits into three disjoint
classes: tokens that occur only on the source side, tokens common to both
sides, and tokens that occur only on the target side.  This module loads
token inventories, builds joint vocabularies, computes that partition, and
serializes it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from pathlib import Path

import numpy as np

PAD = "<pad>"
BOS = "<bos>"
EOS = "<eos>"
UNK = "<unk>"
DEFAULT_SPECIALS = (PAD, BOS, EOS, UNK)

PROPORTION_TOL = 1e-12


class VocabError(ValueError):
    """Base class for vocabulary and partition errors."""


class EmptyVocabulary(VocabError):
    def __init__(self) -> None:
        super().__init__("vocabulary is empty (no tokens after stripping blank lines)")


class DuplicateToken(VocabError):
    def __init__(self, token: str, line: int | None = None):
        self.token = token
        self.line = line
        where = f" at line {line}" if line is not None else ""
        super().__init__(f"duplicate token {token!r}{where}")


class BadToken(VocabError):
    def __init__(self, token: str):
        self.token = token
        super().__init__(f"token {token!r} is empty or contains whitespace")


class OrphanToken(VocabError):
    def __init__(self, token: str):
        self.token = token
        super().__init__(
            f"joint token {token!r} is in neither the source nor the target "
            "vocabulary and was not declared special"
        )


class MalformedRow(VocabError):
    def __init__(self, line: int, detail: str = ""):
        self.line = line
        msg = f"malformed partition row at line {line}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class UnknownCategory(VocabError):
    def __init__(self, line: int, label: str):
        self.line = line
        self.label = label
        super().__init__(f"unknown category label {label!r} at line {line}")


@dataclass(frozen=True)
class Vocabulary:
    """An ordered inventory of unique tokens; a token's id is its position."""

    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.tokens:
            raise EmptyVocabulary()
        seen: set[str] = set()
        for tok in self.tokens:
            if not tok or any(ch.isspace() for ch in tok):
                raise BadToken(tok)
            if tok in seen:
                raise DuplicateToken(tok)
            seen.add(tok)

    @cached_property
    def index(self) -> dict[str, int]:
        return {tok: i for i, tok in enumerate(self.tokens)}

    @property
    def size(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        return self.index[token]

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def __iter__(self):
        return iter(self.tokens)


class Category(IntEnum):
    """Vocabulary class of a token; the numeric order is the serialization order."""

    SOURCE_ONLY = 0
    COMMON = 1
    TARGET_ONLY = 2

    @property
    def label(self) -> str:
        return _CATEGORY_LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> "Category":
        try:
            return _LABEL_CATEGORIES[label]
        except KeyError:
            raise KeyError(label) from None


_CATEGORY_LABELS = {
    Category.SOURCE_ONLY: "source",
    Category.COMMON: "common",
    Category.TARGET_ONLY: "target",
}
_LABEL_CATEGORIES = {v: k for k, v in _CATEGORY_LABELS.items()}


@dataclass(frozen=True)
class CategoryPartition:
    """Total assignment of every joint-vocabulary token to one category.

    ``excluded_ids`` marks tokens (padding, typically) that must never receive
    smoothing mass; they keep their category for counting purposes but are
    dropped from class-size denominators.
    """

    joint: Vocabulary
    category_by_id: tuple[Category, ...]
    excluded_ids: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if len(self.category_by_id) != self.joint.size:
            raise VocabError(
                f"partition covers {len(self.category_by_id)} ids but the joint "
                f"vocabulary has {self.joint.size}"
            )
        for i in self.excluded_ids:
            if not 0 <= i < self.joint.size:
                raise VocabError(f"excluded id {i} is outside the joint vocabulary")
        n_src, n_common, n_tgt = self.counts
        if n_common + n_tgt < 1:
            raise VocabError("partition has no legal target-side tokens")

    @property
    def counts(self) -> tuple[int, int, int]:
        """(n_source, n_common, n_target) over all tokens, excluded included."""
        n = [0, 0, 0]
        for cat in self.category_by_id:
            n[cat] += 1
        return (n[0], n[1], n[2])

    @cached_property
    def category_codes(self) -> np.ndarray:
        return np.array(self.category_by_id, dtype=np.int8)

    @cached_property
    def excluded_mask(self) -> np.ndarray:
        mask = np.zeros(self.joint.size, dtype=bool)
        mask[list(self.excluded_ids)] = True
        return mask

    def ids(self, category: Category, include_excluded: bool = False) -> np.ndarray:
        """Token ids belonging to ``category``, in ascending order."""
        sel = self.category_codes == int(category)
        if not include_excluded:
            sel &= ~self.excluded_mask
        return np.flatnonzero(sel)

    def non_excluded_count(self, category: Category) -> int:
        return int(self.ids(category).size)

    def category_of(self, token_id: int) -> Category:
        return self.category_by_id[token_id]


@dataclass(frozen=True)
class CategoryStats:
    counts: tuple[int, int, int]
    proportions: tuple[float, float, float]


def load_vocab(text: str) -> Vocabulary:
    """Parse a one-token-per-line document into a Vocabulary.

    Blank lines are skipped; a repeated token is an error that reports the
    1-based line number of the second occurrence.
    """
    tokens: list[str] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        tok = raw.strip()
        if not tok:
            continue
        if tok in seen:
            raise DuplicateToken(tok, line=lineno)
        seen.add(tok)
        tokens.append(tok)
    if not tokens:
        raise EmptyVocabulary()
    return Vocabulary(tuple(tokens))


def read_vocab(path: str | Path) -> Vocabulary:
    return load_vocab(Path(path).read_text(encoding="utf-8"))


def save_vocab(vocab: Vocabulary, path: str | Path) -> None:
    Path(path).write_text("\n".join(vocab.tokens) + "\n", encoding="utf-8")


def build_joint(src: Vocabulary, tgt: Vocabulary) -> Vocabulary:
    """Union of the two inventories: all source tokens, then unseen target tokens."""
    tokens = list(src.tokens)
    tokens.extend(tok for tok in tgt.tokens if tok not in src.index)
    return Vocabulary(tuple(tokens))


def partition(
    joint: Vocabulary,
    src: Vocabulary,
    tgt: Vocabulary,
    special: frozenset[str] | set[str] = frozenset(),
    excluded_tokens: frozenset[str] | set[str] | None = None,
) -> CategoryPartition:
    """Assign every joint token to source-only, common, or target-only.

    A token in both side inventories is common; in the source inventory only,
    source-only; in the target inventory only, target-only.  Declared special
    tokens are always common (they legitimately occur on both sides) and need
    not appear in either side inventory.  A joint token found nowhere is an
    error, not a silent bin.

    ``excluded_tokens`` default to the padding token when it is among the
    specials; excluded tokens never receive smoothing mass downstream.
    """
    special = frozenset(special)
    if excluded_tokens is None:
        excluded_tokens = special & {PAD}
    cats: list[Category] = []
    for tok in joint.tokens:
        if tok in special:
            cats.append(Category.COMMON)
        elif tok in src.index and tok in tgt.index:
            cats.append(Category.COMMON)
        elif tok in src.index:
            cats.append(Category.SOURCE_ONLY)
        elif tok in tgt.index:
            cats.append(Category.TARGET_ONLY)
        else:
            raise OrphanToken(tok)
    excluded_ids = set()
    for tok in excluded_tokens:
        if tok not in joint.index:
            raise VocabError(f"excluded token {tok!r} is not in the joint vocabulary")
        excluded_ids.add(joint.id_of(tok))
    return CategoryPartition(joint, tuple(cats), frozenset(excluded_ids))


def stats(p: CategoryPartition) -> CategoryStats:
    """Category counts and their fractions of the joint vocabulary size."""
    counts = p.counts
    size = p.joint.size
    return CategoryStats(counts, tuple(c / size for c in counts))


def serialize_partition(p: CategoryPartition) -> str:
    """TSV rows ``token<TAB>category<TAB>excluded``, in ascending id order."""
    rows = []
    for i, tok in enumerate(p.joint.tokens):
        flag = "1" if i in p.excluded_ids else "0"
        rows.append(f"{tok}\t{p.category_by_id[i].label}\t{flag}")
    return "\n".join(rows) + "\n"


def parse_partition(text: str) -> CategoryPartition:
    """Inverse of :func:`serialize_partition`; ``parse(serialize(p)) == p``."""
    tokens: list[str] = []
    cats: list[Category] = []
    excluded: set[int] = set()
    seen: set[str] = set()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        if not raw.strip():
            continue
        fields = raw.split("\t")
        if len(fields) != 3:
            raise MalformedRow(lineno, f"expected 3 tab-separated fields, got {len(fields)}")
        tok, label, flag = fields
        if tok in seen:
            raise DuplicateToken(tok, line=lineno)
        seen.add(tok)
        try:
            cat = Category.from_label(label)
        except KeyError:
            raise UnknownCategory(lineno, label) from None
        if flag not in ("0", "1"):
            raise MalformedRow(lineno, f"excluded flag must be 0 or 1, got {flag!r}")
        if flag == "1":
            excluded.add(len(tokens))
        tokens.append(tok)
        cats.append(cat)
    if not tokens:
        raise EmptyVocabulary()
    return CategoryPartition(Vocabulary(tuple(tokens)), tuple(cats), frozenset(excluded))


def read_partition(path: str | Path) -> CategoryPartition:
    return parse_partition(Path(path).read_text(encoding="utf-8"))


def save_partition(p: CategoryPartition, path: str | Path) -> None:
    Path(path).write_text(serialize_partition(p), encoding="utf-8")
