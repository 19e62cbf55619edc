"""Per-position target-distribution builders for soft-label training.

Four ways to turn a gold token id into a probability vector over the joint
vocabulary: a hard one-hot, uniform label smoothing, class-weighted smoothing
(the smoothing mass alpha is split across the target-only/common/source-only
classes in a given ratio, uniformly within each class), and masked smoothing
(source-only tokens receive exactly zero mass and the target-only and common
classes are pooled into one uniform class).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .vocab import Category, CategoryPartition

BETA_SUM_TOL = 1e-12
SUM_TOL = 1e-9


class SmoothingError(ValueError):
    """Base class for distribution-builder errors."""


class AlphaOutOfRange(SmoothingError):
    def __init__(self, alpha: float):
        super().__init__(f"alpha must be in [0, 1), got {alpha}")


class InvalidBetas(SmoothingError):
    pass


class IndexOutOfRange(SmoothingError):
    def __init__(self, index: int, size: int):
        super().__init__(f"token id {index} is outside the vocabulary of size {size}")


class ExcludedCorrectId(SmoothingError):
    def __init__(self, index: int):
        super().__init__(f"correct token id {index} is excluded from smoothing (padding)")


class EmptyClassWithMass(SmoothingError):
    def __init__(self, category: Category):
        self.category = category
        super().__init__(
            f"class {category.label!r} has positive smoothing weight but no "
            "non-excluded tokens; recompute the betas explicitly instead"
        )


class NoLegalTargets(SmoothingError):
    def __init__(self) -> None:
        super().__init__("no non-excluded target-only or common tokens to smooth over")


class MalformedDistribution(SmoothingError):
    pass


class Mode(Enum):
    ONE_HOT = "onehot"
    UNIFORM = "uniform"
    WEIGHTED = "weighted"
    MASKED = "masked"


@dataclass
class Diagnostics:
    """Counters for conditions that are tolerated but worth surfacing."""

    gold_without_share: int = 0

    def reset(self) -> None:
        self.gold_without_share = 0


#: Module-level diagnostics; incremented when a gold token's class carries zero
#: smoothing weight (e.g. a source-only gold token under masked smoothing,
#: which happens only with noisy data or hand-built partitions).
diagnostics = Diagnostics()


def _check_alpha(alpha: float) -> None:
    if not (0.0 <= alpha < 1.0) or not np.isfinite(alpha):
        raise AlphaOutOfRange(alpha)


def _check_betas(betas) -> tuple[float, float, float]:
    if betas is None or len(betas) != 3:
        raise InvalidBetas(f"betas must be three weights (target, common, source), got {betas!r}")
    bt, bc, bs = (float(b) for b in betas)
    for b in (bt, bc, bs):
        if not np.isfinite(b) or b < 0.0:
            raise InvalidBetas(f"betas must be finite and non-negative, got {betas!r}")
    if abs((bt + bc + bs) - 1.0) > BETA_SUM_TOL:
        raise InvalidBetas(f"betas must sum to 1, got {betas!r} (sum {bt + bc + bs!r})")
    return (bt, bc, bs)


@dataclass(frozen=True)
class SmoothingSpec:
    """How to build target distributions: mode, smoothing mass, class weights."""

    mode: Mode
    alpha: float = 0.1
    betas: tuple[float, float, float] | None = None

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if self.mode is Mode.WEIGHTED:
            object.__setattr__(self, "betas", _check_betas(self.betas))
        elif self.betas is not None:
            raise InvalidBetas(f"betas are only meaningful in weighted mode, not {self.mode.value}")

    def label(self) -> str:
        """Short, filename-safe description of the spec."""
        if self.mode is Mode.ONE_HOT:
            return "onehot"
        out = f"{self.mode.value}-a{self.alpha:g}"
        if self.betas is not None:
            out += "-b" + "-".join(f"{b:g}" for b in self.betas)
        return out


@dataclass(frozen=True, eq=False)
class LabelDistribution:
    """Dense probability vector over the joint vocabulary for one position."""

    probs: np.ndarray
    correct_id: int
    alpha: float
    mode: Mode
    betas: tuple[float, float, float] | None = None


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str


def one_hot(size: int, correct_id: int) -> LabelDistribution:
    """All mass on the correct token."""
    if not 0 <= correct_id < size:
        raise IndexOutOfRange(correct_id, size)
    probs = np.zeros(size, dtype=np.float64)
    probs[correct_id] = 1.0
    return LabelDistribution(probs, correct_id, alpha=0.0, mode=Mode.ONE_HOT)


def smooth_uniform(size: int, correct_id: int, alpha: float) -> LabelDistribution:
    """Classic label smoothing: every token gets alpha/K, the correct one 1-alpha more."""
    _check_alpha(alpha)
    if not 0 <= correct_id < size:
        raise IndexOutOfRange(correct_id, size)
    probs = np.full(size, alpha / size, dtype=np.float64)
    probs[correct_id] += 1.0 - alpha
    return LabelDistribution(probs, correct_id, alpha=alpha, mode=Mode.UNIFORM)


def _class_share_distribution(
    p: CategoryPartition,
    correct_id: int,
    alpha: float,
    shares: dict[Category, float],
) -> np.ndarray:
    probs = np.zeros(p.joint.size, dtype=np.float64)
    for cat, share in shares.items():
        if share > 0.0:
            probs[p.ids(cat)] = share
    if alpha > 0.0 and shares.get(p.category_of(correct_id), 0.0) == 0.0:
        diagnostics.gold_without_share += 1
    probs[correct_id] += 1.0 - alpha
    return probs


def smooth_weighted(
    p: CategoryPartition,
    correct_id: int,
    alpha: float,
    betas: tuple[float, float, float],
) -> LabelDistribution:
    """Split the smoothing mass across classes in ratio betas, uniform within each.

    Every non-excluded token of class X receives ``alpha * beta_X / |X|`` where
    |X| counts non-excluded members; excluded tokens receive zero; the correct
    token additionally receives ``1 - alpha`` on top of its class share.  A
    class with positive weight but no members is a hard error rather than a
    silent renormalization.
    """
    _check_alpha(alpha)
    bt, bc, bs = _check_betas(betas)
    if not 0 <= correct_id < p.joint.size:
        raise IndexOutOfRange(correct_id, p.joint.size)
    if correct_id in p.excluded_ids:
        raise ExcludedCorrectId(correct_id)
    shares: dict[Category, float] = {}
    for cat, beta in (
        (Category.TARGET_ONLY, bt),
        (Category.COMMON, bc),
        (Category.SOURCE_ONLY, bs),
    ):
        n = p.non_excluded_count(cat)
        if beta > 0.0 and n == 0:
            raise EmptyClassWithMass(cat)
        shares[cat] = alpha * beta / n if beta > 0.0 else 0.0
    probs = _class_share_distribution(p, correct_id, alpha, shares)
    return LabelDistribution(probs, correct_id, alpha=alpha, mode=Mode.WEIGHTED, betas=(bt, bc, bs))


def smooth_masked(p: CategoryPartition, correct_id: int, alpha: float) -> LabelDistribution:
    """Smooth uniformly over the pooled target-only and common tokens only.

    Source-only tokens receive exactly zero (bit-exact, not merely small); so
    do excluded tokens.  The correct token receives ``1 - alpha`` on top of its
    pool share, or bare ``1 - alpha`` if it is source-only (tolerated for noisy
    data; counted in :data:`diagnostics`).
    """
    _check_alpha(alpha)
    if not 0 <= correct_id < p.joint.size:
        raise IndexOutOfRange(correct_id, p.joint.size)
    if correct_id in p.excluded_ids:
        raise ExcludedCorrectId(correct_id)
    pool = p.non_excluded_count(Category.TARGET_ONLY) + p.non_excluded_count(Category.COMMON)
    if pool == 0:
        raise NoLegalTargets()
    share = alpha / pool
    probs = _class_share_distribution(
        p,
        correct_id,
        alpha,
        {Category.TARGET_ONLY: share, Category.COMMON: share, Category.SOURCE_ONLY: 0.0},
    )
    return LabelDistribution(probs, correct_id, alpha=alpha, mode=Mode.MASKED)


def masked_equivalent_betas(p: CategoryPartition) -> tuple[float, float, float]:
    """Class weights that make weighted smoothing coincide with masked smoothing.

    Masked smoothing is NOT weighted smoothing with weights (1/2, 1/2, 0): the
    pooled uniform share implies class sums proportional to the class sizes,
    i.e. weights (|T|/|T u C|, |C|/|T u C|, 0) over non-excluded counts.
    """
    nt = p.non_excluded_count(Category.TARGET_ONLY)
    nc = p.non_excluded_count(Category.COMMON)
    if nt + nc == 0:
        raise NoLegalTargets()
    return (nt / (nt + nc), nc / (nt + nc), 0.0)


def build(spec: SmoothingSpec, p: CategoryPartition, correct_id: int) -> LabelDistribution:
    """Dispatch to the builder selected by ``spec.mode``."""
    if spec.mode is Mode.ONE_HOT:
        return one_hot(p.joint.size, correct_id)
    if spec.mode is Mode.UNIFORM:
        return smooth_uniform(p.joint.size, correct_id, spec.alpha)
    if spec.mode is Mode.WEIGHTED:
        return smooth_weighted(p, correct_id, spec.alpha, spec.betas)
    return smooth_masked(p, correct_id, spec.alpha)


def validate(d: LabelDistribution) -> list[Violation]:
    """Check the distribution contract; violations are data, not errors.

    Empty list iff all entries are non-negative, the entries sum to one within
    1e-9, and the correct token holds at least ``1 - alpha``.
    """
    violations: list[Violation] = []
    probs = np.asarray(d.probs, dtype=np.float64)
    if not 0 <= d.correct_id < probs.size:
        violations.append(
            Violation("CorrectIdOutOfRange", f"correct_id {d.correct_id} for size {probs.size}")
        )
        return violations
    neg = np.flatnonzero(probs < 0.0)
    if neg.size:
        violations.append(
            Violation("NegativeEntry", f"{neg.size} negative entries, first at id {neg[0]}")
        )
    total = float(np.sum(probs))
    if abs(total - 1.0) > SUM_TOL:
        violations.append(Violation("SumNotOne", f"sum is {total!r}"))
    floor = 1.0 - d.alpha
    if probs[d.correct_id] < floor:
        violations.append(
            Violation(
                "GoldBelowFloor",
                f"probs[{d.correct_id}] = {probs[d.correct_id]!r} < 1 - alpha = {floor!r}",
            )
        )
    return violations


def dump_distribution(d: LabelDistribution) -> str:
    """Round-trippable text record; probabilities carry 17 significant digits."""
    betas = "-" if d.betas is None else ",".join(f"{b:.17g}" for b in d.betas)
    lines = [
        f"K\t{len(d.probs)}",
        f"alpha\t{d.alpha:.17g}",
        f"mode\t{d.mode.value}",
        f"betas\t{betas}",
        f"correct_id\t{d.correct_id}",
        "probs\t" + " ".join(f"{x:.17g}" for x in d.probs),
    ]
    return "\n".join(lines) + "\n"


def parse_distribution(text: str) -> LabelDistribution:
    """Inverse of :func:`dump_distribution`, bit-faithful for float64 values."""
    fields: dict[str, str] = {}
    for raw in text.split("\n"):
        if not raw.strip():
            continue
        key, sep, value = raw.partition("\t")
        if not sep:
            raise MalformedDistribution(f"expected key<TAB>value, got {raw!r}")
        fields[key] = value
    required = ("K", "alpha", "mode", "betas", "correct_id", "probs")
    missing = [k for k in required if k not in fields]
    if missing:
        raise MalformedDistribution(f"missing fields: {', '.join(missing)}")
    try:
        size = int(fields["K"])
        alpha = float(fields["alpha"])
        mode = Mode(fields["mode"])
        correct_id = int(fields["correct_id"])
        betas = None
        if fields["betas"] != "-":
            parts = fields["betas"].split(",")
            if len(parts) != 3:
                raise ValueError(f"expected 3 betas, got {len(parts)}")
            betas = tuple(float(b) for b in parts)
        probs = np.array([float(x) for x in fields["probs"].split()], dtype=np.float64)
    except ValueError as exc:
        raise MalformedDistribution(str(exc)) from None
    if probs.size != size:
        raise MalformedDistribution(f"K is {size} but {probs.size} probabilities given")
    return LabelDistribution(probs, correct_id, alpha=alpha, mode=mode, betas=betas)
