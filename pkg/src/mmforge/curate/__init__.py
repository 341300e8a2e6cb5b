"""Instruction-data pool curation: balancing, mixing, prompts, hashing, engine."""

from .pool import (
    CATEGORIES,
    CuratorConfig,
    DataPool,
    PoolRecord,
    default_ratio_preset,
    load_pool,
    normalize_ratios,
    save_pool,
)
from .balance import apply_threshold, cumulative_curve, suggest_elbow
from .mix import MixResult, mix_by_ratio
from .prompts import (
    DEFAULT_PROMPT_REGISTRY,
    RESPONSE_FORMAT_PROMPTS,
    UnknownSourceError,
    attach_format_prompt,
)
from .dhash import dhash, hamming64, to_grayscale
from .leakage import LeakageReport, LeakageRow, leakage_scan

__all__ = [
    "CATEGORIES",
    "PoolRecord",
    "DataPool",
    "CuratorConfig",
    "load_pool",
    "save_pool",
    "normalize_ratios",
    "default_ratio_preset",
    "cumulative_curve",
    "apply_threshold",
    "suggest_elbow",
    "mix_by_ratio",
    "MixResult",
    "RESPONSE_FORMAT_PROMPTS",
    "DEFAULT_PROMPT_REGISTRY",
    "attach_format_prompt",
    "UnknownSourceError",
    "dhash",
    "hamming64",
    "to_grayscale",
    "leakage_scan",
    "LeakageReport",
    "LeakageRow",
]
