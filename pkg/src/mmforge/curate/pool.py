"""Instruction-tuning record pools, tagged by source and category."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

CATEGORIES = ("General", "OCR", "Counting", "Code", "Math", "Science", "Language")


@dataclass(frozen=True, slots=True)
class PoolRecord:
    id: str
    source: str
    category: str
    text: str = ""
    response: str = ""
    image_ref: str | None = None

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"category must be one of {CATEGORIES}, got {self.category!r}")

    def with_text(self, text: str) -> "PoolRecord":
        return replace(self, text=text)


@dataclass
class DataPool:
    records: list[PoolRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def source_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for rec in self.records:
            counts[rec.source] = counts.get(rec.source, 0) + 1
        return counts

    def category_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for rec in self.records:
            counts[rec.category] = counts.get(rec.category, 0) + 1
        return counts


@dataclass(frozen=True)
class CuratorConfig:
    """Knobs for the balancing and mixing passes.

    threshold:   per-source record cap
    ratios:      category -> target fraction of the mixed set (sums to 1)
    target_size: number of records the mix should produce
    """

    threshold: int
    ratios: dict[str, float]
    target_size: int
    seed: int = 0

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        for cat, r in self.ratios.items():
            if cat not in CATEGORIES:
                raise ValueError(f"unknown ratio category {cat!r}")
            if r < 0:
                raise ValueError(f"ratio for {cat} must be nonnegative, got {r}")
        total = sum(self.ratios.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"ratios must sum to 1 within 1e-9, got {total}")
        if self.target_size < 1:
            raise ValueError("target_size must be >= 1")

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "CuratorConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(
            threshold=int(raw.get("threshold", 250000)),
            ratios=normalize_ratios({k: float(v) for k, v in raw["ratios"].items()}),
            target_size=int(raw["target_size"]),
            seed=int(raw.get("seed", 0)),
        )


def normalize_ratios(ratios: dict[str, float]) -> dict[str, float]:
    total = sum(ratios.values())
    if total <= 0:
        raise ValueError("ratios must have a positive sum")
    return {k: v / total for k, v in ratios.items()}


def default_ratio_preset() -> dict[str, float]:
    """The shipped approximate category mix (normalized); see presets/ratio_default.json."""
    from importlib import resources

    raw = json.loads(
        resources.files("mmforge.curate").joinpath("presets/ratio_default.json").read_text("utf-8")
    )
    return normalize_ratios({k: float(v) for k, v in raw["ratios"].items()})


def save_pool(path: str | os.PathLike, pool: DataPool) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in pool.records:
            fh.write(
                json.dumps(
                    {
                        "id": rec.id,
                        "source": rec.source,
                        "category": rec.category,
                        "text": rec.text,
                        "response": rec.response,
                        "image_ref": rec.image_ref,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def load_pool(path: str | os.PathLike) -> DataPool:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            records.append(
                PoolRecord(
                    id=str(raw["id"]),
                    source=raw["source"],
                    category=raw["category"],
                    text=raw.get("text", ""),
                    response=raw.get("response", ""),
                    image_ref=raw.get("image_ref"),
                )
            )
    return DataPool(records)
