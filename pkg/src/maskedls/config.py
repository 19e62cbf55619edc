"""Flat run configuration: one JSON document per run, strict keys, no hidden defaults.

The resolved form (every key present, defaults applied) is archived in the run
directory; re-running from that file reproduces the run bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

from . import smoothing as S
from .toynmt.model import ModelConfig
from .toynmt.synth import SyntheticTaskSpec
from .toynmt.train import TrainConfig


class ConfigError(ValueError):
    pass


_REQUIRED = object()

# key -> (kind, default); kinds: int, float, bool, str, betas, str_list, int_list
_SCHEMA: dict[str, tuple[str, object]] = {
    "task_n_source_only": ("int", 10),
    "task_n_common": ("int", 4),
    "task_n_target_only": ("int", 10),
    "task_min_len": ("int", 4),
    "task_max_len": ("int", 9),
    "task_train_pairs": ("int", 320),
    "task_dev_pairs": ("int", 48),
    "task_test_pairs": ("int", 48),
    "task_common_token_rate": ("float", 0.3),
    "task_seed": ("int", 0),
    "task2_enabled": ("bool", False),
    "task2_n_source_only": ("int", 10),
    "task2_min_len": ("int", 4),
    "task2_max_len": ("int", 9),
    "task2_train_pairs": ("int", 320),
    "task2_dev_pairs": ("int", 48),
    "task2_test_pairs": ("int", 48),
    "task2_common_token_rate": ("float", 0.3),
    "task2_seed": ("int", 1),
    "model_layers": ("int", 2),
    "model_dim": ("int", 64),
    "model_heads": ("int", 2),
    "model_ffn_dim": ("int", 128),
    "model_dropout": ("float", 0.1),
    "model_max_positions": ("int", 64),
    "model_seed": ("int", 0),
    "train_lr": ("float", 3e-3),
    "train_warmup_steps": ("int", 200),
    "train_max_steps": ("int", 1200),
    "train_batch_tokens": ("int", 256),
    "train_eval_interval": ("int", 40),
    "train_adam_beta1": ("float", 0.9),
    "train_adam_beta2": ("float", 0.98),
    "train_seed": ("int", 0),
    "smooth_mode": ("str", "uniform"),
    "smooth_alpha": ("float", 0.1),
    "smooth_betas": ("betas", None),
    "eval_bins": ("int", 10),
    "out_dir": ("str", _REQUIRED),
    "compare_specs": ("str_list", ["uniform", "masked"]),
    "compare_seeds": ("int_list", [0, 1, 2, 3, 4]),
}


def _check_value(key: str, kind: str, value):
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    if kind == "betas":
        if value is None:
            return None
        if (
            not isinstance(value, list)
            or len(value) != 3
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
        ):
            raise ConfigError(f"{key}: expected null or three numbers, got {value!r}")
        return [float(v) for v in value]
    if kind == "str_list":
        if not isinstance(value, list) or not value or any(not isinstance(v, str) for v in value):
            raise ConfigError(f"{key}: expected a non-empty list of strings, got {value!r}")
        return list(value)
    if kind == "int_list":
        if (
            not isinstance(value, list)
            or not value
            or any(isinstance(v, bool) or not isinstance(v, int) for v in value)
        ):
            raise ConfigError(f"{key}: expected a non-empty list of integers, got {value!r}")
        return list(value)
    raise AssertionError(kind)


def resolve(raw: dict) -> dict:
    """Validate a raw config mapping and fill in every default."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - set(_SCHEMA))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    resolved: dict = {}
    for key, (kind, default) in _SCHEMA.items():
        if key in raw:
            resolved[key] = _check_value(key, kind, raw[key])
        elif default is _REQUIRED:
            raise ConfigError(f"missing required config key: {key}")
        else:
            resolved[key] = default
    return resolved


def load_config(path: str | Path) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return resolve(raw)


def dump_config(resolved: dict) -> str:
    return json.dumps(resolved, indent=2, sort_keys=True) + "\n"


def task_spec(cfg: dict) -> SyntheticTaskSpec:
    second = None
    if cfg["task2_enabled"]:
        second = SyntheticTaskSpec(
            n_source_only=cfg["task2_n_source_only"],
            n_common=cfg["task_n_common"],
            n_target_only=cfg["task_n_target_only"],
            sentence_length_range=(cfg["task2_min_len"], cfg["task2_max_len"]),
            pair_counts=(
                cfg["task2_train_pairs"],
                cfg["task2_dev_pairs"],
                cfg["task2_test_pairs"],
            ),
            common_token_rate=cfg["task2_common_token_rate"],
            seed=cfg["task2_seed"],
        )
    return SyntheticTaskSpec(
        n_source_only=cfg["task_n_source_only"],
        n_common=cfg["task_n_common"],
        n_target_only=cfg["task_n_target_only"],
        sentence_length_range=(cfg["task_min_len"], cfg["task_max_len"]),
        pair_counts=(cfg["task_train_pairs"], cfg["task_dev_pairs"], cfg["task_test_pairs"]),
        common_token_rate=cfg["task_common_token_rate"],
        seed=cfg["task_seed"],
        second_pair=second,
    )


def model_config(cfg: dict) -> ModelConfig:
    return ModelConfig(
        layers=cfg["model_layers"],
        model_dim=cfg["model_dim"],
        heads=cfg["model_heads"],
        ffn_dim=cfg["model_ffn_dim"],
        dropout=cfg["model_dropout"],
        max_positions=cfg["model_max_positions"],
        seed=cfg["model_seed"],
    )


def train_config(cfg: dict) -> TrainConfig:
    return TrainConfig(
        lr=cfg["train_lr"],
        warmup_steps=cfg["train_warmup_steps"],
        max_steps=cfg["train_max_steps"],
        batch_tokens=cfg["train_batch_tokens"],
        eval_interval=cfg["train_eval_interval"],
        adam_betas=(cfg["train_adam_beta1"], cfg["train_adam_beta2"]),
        seed=cfg["train_seed"],
    )


def smoothing_spec(cfg: dict) -> S.SmoothingSpec:
    return parse_spec_string(
        cfg["smooth_mode"]
        if cfg["smooth_betas"] is None
        else cfg["smooth_mode"] + ":" + ",".join(str(b) for b in cfg["smooth_betas"]),
        cfg["smooth_alpha"],
    )


def parse_spec_string(text: str, alpha: float) -> S.SmoothingSpec:
    """``mode`` or ``weighted:bt,bc,bs``; alpha is shared across the run."""
    mode_text, _, beta_text = text.partition(":")
    try:
        mode = S.Mode(mode_text)
    except ValueError:
        valid = ", ".join(m.value for m in S.Mode)
        raise ConfigError(f"unknown smoothing mode {mode_text!r} (expected one of: {valid})") from None
    betas = None
    if beta_text:
        parts = beta_text.split(",")
        if len(parts) != 3:
            raise ConfigError(f"betas must be three comma-separated numbers, got {beta_text!r}")
        try:
            betas = tuple(float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"betas must be numeric, got {beta_text!r}") from None
    try:
        if mode is S.Mode.ONE_HOT:
            if betas is not None:
                raise S.InvalidBetas("one-hot mode takes no betas")
            return S.SmoothingSpec(mode, alpha=0.0)
        return S.SmoothingSpec(mode, alpha=alpha, betas=betas)
    except S.SmoothingError as exc:
        raise ConfigError(str(exc)) from None


def compare_specs(cfg: dict) -> list[S.SmoothingSpec]:
    return [parse_spec_string(text, cfg["smooth_alpha"]) for text in cfg["compare_specs"]]
