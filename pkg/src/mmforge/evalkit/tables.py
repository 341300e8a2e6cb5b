"""Models x benchmarks score tables with per-benchmark metadata."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

BENCHMARK_CATEGORIES = ("General", "Knowledge", "OCR & Chart", "Vision-Centric")


@dataclass(frozen=True)
class BenchmarkMeta:
    name: str
    category: str
    scale_divisor: float = 1.0  # e.g. 20 for a perception score reported on a 2000-point scale
    num_choices: int | None = None
    size: int = 0
    paired_scoring: bool = False  # yes/no-paired protocols have no single-guess baseline

    def __post_init__(self):
        if self.category not in BENCHMARK_CATEGORIES:
            raise ValueError(
                f"benchmark {self.name!r}: category must be one of {BENCHMARK_CATEGORIES}, "
                f"got {self.category!r}"
            )
        if self.scale_divisor <= 0:
            raise ValueError(f"benchmark {self.name!r}: scale_divisor must be positive")


@dataclass
class ScoreTable:
    models: list[str]
    benchmarks: list[BenchmarkMeta]
    scores: np.ndarray = field(repr=False)  # (n_models, n_benchmarks)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.scores.shape != (len(self.models), len(self.benchmarks)):
            raise ValueError(
                f"scores shape {self.scores.shape} != "
                f"({len(self.models)}, {len(self.benchmarks)})"
            )
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("scores must be finite")

    @property
    def benchmark_names(self) -> list[str]:
        return [b.name for b in self.benchmarks]

    def scaled(self) -> np.ndarray:
        divisors = np.array([b.scale_divisor for b in self.benchmarks])
        return self.scores / divisors[None, :]

    @classmethod
    def from_csv(cls, scores_path: str | os.PathLike, meta_path: str | os.PathLike) -> "ScoreTable":
        """Scores: header `model,<bench>,...`; metadata: one row per benchmark."""
        meta: dict[str, BenchmarkMeta] = {}
        with open(meta_path, "r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                name = row["benchmark"].strip()
                choices = row.get("num_choices", "").strip()
                meta[name] = BenchmarkMeta(
                    name=name,
                    category=row["category"].strip(),
                    scale_divisor=float(row.get("scale_divisor", "") or 1.0),
                    num_choices=int(choices) if choices else None,
                    size=int(row.get("size", "") or 0),
                    paired_scoring=(row.get("paired_scoring", "").strip().lower() in ("1", "true", "yes")),
                )
        with open(scores_path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            bench_names = [h.strip() for h in header[1:]]
            missing = [b for b in bench_names if b not in meta]
            if missing:
                raise ValueError(f"no metadata for benchmarks: {missing}")
            models = []
            rows = []
            for row in reader:
                if not row:
                    continue
                models.append(row[0].strip())
                rows.append([float(v) for v in row[1:]])
        return cls(
            models=models,
            benchmarks=[meta[b] for b in bench_names],
            scores=np.array(rows, dtype=np.float64),
        )
