"""Desk-scale experiment harness: synthetic bilingual data, a compact
encoder-decoder, deterministic training under any smoothing spec, and
comparison experiments."""

from .synth import SyntheticTaskSpec, ParallelCorpus, gen_synthetic, save_corpus, load_corpus
from .model import ModelConfig, TinyTransformer, InvalidConfig, init_model, greedy_decode
from .train import TrainConfig, TrainReport, DivergedLoss, train
from .evaluate import EvalMetrics, EmptyCorpus, evaluate
from .compare import RunRecord, ExperimentReport, compare

__all__ = [
    "SyntheticTaskSpec",
    "ParallelCorpus",
    "gen_synthetic",
    "save_corpus",
    "load_corpus",
    "ModelConfig",
    "TinyTransformer",
    "InvalidConfig",
    "init_model",
    "greedy_decode",
    "TrainConfig",
    "TrainReport",
    "DivergedLoss",
    "train",
    "EvalMetrics",
    "EmptyCorpus",
    "evaluate",
    "RunRecord",
    "ExperimentReport",
    "compare",
]
