"""Language-aware label smoothing for shared-vocabulary translation training.

A joint source/target vocabulary splits into source-only, common, and
target-only token classes.  This package builds that partition, constructs
one-hot / uniform / class-weighted / source-masked target distributions,
computes soft-target losses with analytic gradients, measures calibration and
translation quality, and ships a deterministic desk-scale trainer that turns
the approach's claims into testable properties.
"""

from .vocab import (
    Category,
    CategoryPartition,
    CategoryStats,
    Vocabulary,
    build_joint,
    load_vocab,
    parse_partition,
    partition,
    serialize_partition,
    stats,
)
from .smoothing import (
    LabelDistribution,
    Mode,
    SmoothingSpec,
    dump_distribution,
    masked_equivalent_betas,
    one_hot,
    parse_distribution,
    smooth_masked,
    smooth_uniform,
    smooth_weighted,
    validate,
)
from .loss import (
    PositionLoss,
    SequenceLoss,
    cross_entropy,
    grad_logits,
    log_softmax,
    perplexity,
    sequence_loss,
    softmax,
)
from .metrics import (
    CalibrationReport,
    PredictionSample,
    bleu,
    chrf,
    ece,
    reliability_table,
)

__version__ = "0.1.0"

__all__ = [
    "Category",
    "CategoryPartition",
    "CategoryStats",
    "Vocabulary",
    "build_joint",
    "load_vocab",
    "parse_partition",
    "partition",
    "serialize_partition",
    "stats",
    "LabelDistribution",
    "Mode",
    "SmoothingSpec",
    "dump_distribution",
    "masked_equivalent_betas",
    "one_hot",
    "parse_distribution",
    "smooth_masked",
    "smooth_uniform",
    "smooth_weighted",
    "validate",
    "PositionLoss",
    "SequenceLoss",
    "cross_entropy",
    "grad_logits",
    "log_softmax",
    "perplexity",
    "sequence_loss",
    "softmax",
    "CalibrationReport",
    "PredictionSample",
    "bleu",
    "chrf",
    "ece",
    "reliability_table",
    "__version__",
]
