"""Benchmark analytics over score tables.

Correlations run across models per benchmark column. The 2D map treats each
benchmark's standardized score profile as a point: eigen-decomposing the
double-centered correlation matrix gives principal coordinates (so the map
is centered by construction), and seeded k-means labels the points.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .tables import BenchmarkMeta, ScoreTable


def category_scores(table: ScoreTable) -> dict[str, dict[str, float]]:
    """Per-model unweighted category means of divisor-scaled scores."""
    if not table.benchmarks:
        raise ValueError("score table has no benchmarks")
    scaled = table.scaled()
    buckets: dict[str, list[int]] = {}
    for idx, bench in enumerate(table.benchmarks):
        buckets.setdefault(bench.category, []).append(idx)
    out: dict[str, dict[str, float]] = {}
    for m, model in enumerate(table.models):
        out[model] = {
            category: float(scaled[m, cols].mean()) for category, cols in buckets.items()
        }
    return out


def random_baseline(meta: BenchmarkMeta) -> float:
    """Expected score of uniform guessing on single-answer multiple choice."""
    if meta.paired_scoring:
        raise ValueError(
            f"benchmark {meta.name!r} uses paired yes/no scoring; no single-guess baseline exists"
        )
    if meta.num_choices is None:
        raise ValueError(f"benchmark {meta.name!r} has no num_choices")
    return 100.0 / meta.num_choices


@dataclass(frozen=True)
class GapRow:
    benchmark: str
    gap: float  # mean(enabled) - mean(disabled), divisor-scaled points
    disabled_minus_random: float | None
    vision_insensitive: bool  # gap strictly below the 5-point flag threshold


def vision_gap_report(
    enabled: ScoreTable,
    disabled: ScoreTable,
    baselines: dict[str, float] | None = None,
    flag_threshold: float = 5.0,
) -> list[GapRow]:
    """Benchmarks sorted by how much disabling visual input costs.

    Rows whose gap is strictly below `flag_threshold` points are flagged as
    vision-insensitive. `baselines` supplies random-guess scores; when
    omitted they are derived from benchmark metadata where possible.
    """
    if enabled.benchmark_names != disabled.benchmark_names:
        raise ValueError(
            "enabled/disabled tables cover different benchmarks: "
            f"{enabled.benchmark_names} vs {disabled.benchmark_names}"
        )
    mean_on = enabled.scaled().mean(axis=0)
    mean_off = disabled.scaled().mean(axis=0)
    rows = []
    for idx, bench in enumerate(enabled.benchmarks):
        if baselines is not None and bench.name in baselines:
            base = baselines[bench.name]
        else:
            try:
                base = random_baseline(bench)
            except ValueError:
                base = None
        gap = float(mean_on[idx] - mean_off[idx])
        rows.append(
            GapRow(
                benchmark=bench.name,
                gap=gap,
                disabled_minus_random=None if base is None else float(mean_off[idx] - base),
                vision_insensitive=gap < flag_threshold,
            )
        )
    rows.sort(key=lambda r: (-r.gap, r.benchmark))
    return rows


def correlation_matrix(table: ScoreTable) -> np.ndarray:
    """Pearson correlation between benchmark columns across models.

    Exactly symmetric with a unit diagonal; a zero-variance column warns and
    correlates 0 with everything else.
    """
    if len(table.models) < 2:
        raise ValueError("correlation needs at least 2 models")
    x = table.scaled()
    n_bench = x.shape[1]
    centered = x - x.mean(axis=0, keepdims=True)
    norms = np.sqrt((centered**2).sum(axis=0))
    flat = norms == 0
    if np.any(flat):
        names = [table.benchmarks[i].name for i in np.flatnonzero(flat)]
        warnings.warn(
            f"zero-variance benchmark columns {names}; their correlations are reported as 0",
            stacklevel=2,
        )
    out = np.eye(n_bench)
    for i in range(n_bench):
        for j in range(i + 1, n_bench):
            if flat[i] or flat[j]:
                value = 0.0
            else:
                value = float(centered[:, i] @ centered[:, j] / (norms[i] * norms[j]))
                value = min(1.0, max(-1.0, value))
            out[i, j] = value
            out[j, i] = value
    return out


@dataclass(frozen=True)
class PcaClusters:
    benchmarks: list[str]
    coordinates: np.ndarray  # (n_benchmarks, 2)
    labels: np.ndarray  # (n_benchmarks,) anonymous cluster ids
    explained: tuple[float, float]  # variance fraction of the two components


def pca_cluster(table: ScoreTable, k: int = 4, seed: int = 0, restarts: int | None = None) -> PcaClusters:
    """2D principal coordinates of benchmark score profiles plus k-means ids.

    Cluster ids are anonymous; any naming is a caller-side label map.
    """
    n_models, n_bench = table.scores.shape
    if n_models < 3:
        raise ValueError("pca_cluster needs at least 3 models")
    if k < 1 or k > n_bench:
        raise ValueError(f"k must be in [1, {n_bench}], got {k}")

    corr = correlation_matrix(table)
    centering = np.eye(n_bench) - np.full((n_bench, n_bench), 1.0 / n_bench)
    gram = centering @ corr @ centering
    gram = (gram + gram.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(gram)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]

    coords = np.zeros((n_bench, 2))
    for comp in range(2):
        vec = eigvecs[:, comp]
        if vec[np.argmax(np.abs(vec))] < 0:  # deterministic orientation
            vec = -vec
        coords[:, comp] = np.sqrt(eigvals[comp]) * vec
    total = eigvals.sum()
    explained = (
        (float(eigvals[0] / total), float(eigvals[1] / total)) if total > 0 else (0.0, 0.0)
    )

    labels = _kmeans(coords, k, seed=seed, restarts=restarts or k)
    return PcaClusters(
        benchmarks=table.benchmark_names,
        coordinates=coords,
        labels=labels,
        explained=explained,
    )


def _kmeans(points: np.ndarray, k: int, seed: int, restarts: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n = points.shape[0]
    best_labels = np.zeros(n, dtype=int)
    best_sse = np.inf
    for _ in range(max(restarts, 1)):
        centers = points[rng.choice(n, size=k, replace=False)].copy()
        labels = np.zeros(n, dtype=int)
        for _ in range(100):
            dists = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
            new_labels = dists.argmin(axis=1)
            for c in range(k):
                members = points[new_labels == c]
                if len(members):
                    centers[c] = members.mean(axis=0)
                else:  # re-seed an empty cluster on the farthest point
                    centers[c] = points[dists.min(axis=1).argmax()]
            if np.array_equal(new_labels, labels):
                break
            labels = new_labels
        sse = float(((points - centers[labels]) ** 2).sum())
        if sse < best_sse - 1e-12:
            best_sse = sse
            best_labels = labels.copy()
    return best_labels
