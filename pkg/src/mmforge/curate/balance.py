"""Source balancing: cumulative tail curves and per-source caps."""

from __future__ import annotations

import numpy as np

from .pool import DataPool


def cumulative_curve(pool: DataPool) -> list[tuple[int, int]]:
    """(rank, cumulative count) with sources sorted smallest-first.

    Point r is the total number of records contributed by the r smallest
    sources, so the curve is monotone and ends at the pool size.
    """
    counts = pool.source_counts()
    if not counts:
        raise ValueError("cumulative_curve needs a nonempty pool")
    ordered = sorted(counts.items(), key=lambda kv: (kv[1], kv[0]))
    curve = []
    running = 0
    for rank, (_, count) in enumerate(ordered, start=1):
        running += count
        curve.append((rank, running))
    return curve


def apply_threshold(pool: DataPool, threshold: int, seed: int = 0) -> DataPool:
    """Cap every source at `threshold` records by seeded uniform subsampling.

    Sources at or under the cap pass through whole; oversized sources keep a
    uniform random subset of exactly `threshold` records with their original
    relative order preserved.
    """
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    positions: dict[str, list[int]] = {}
    for idx, rec in enumerate(pool.records):
        positions.setdefault(rec.source, []).append(idx)

    rng = np.random.default_rng(seed)
    keep = np.ones(len(pool.records), dtype=bool)
    for source in sorted(positions):
        idxs = positions[source]
        if len(idxs) <= threshold:
            continue
        chosen = rng.choice(len(idxs), size=threshold, replace=False)
        mask = np.zeros(len(idxs), dtype=bool)
        mask[chosen] = True
        keep[np.asarray(idxs)] = mask
    records = [rec for rec, k in zip(pool.records, keep) if k]
    return DataPool(records)


def suggest_elbow(curve: list[tuple[int, int]]) -> tuple[int, int]:
    """Knee heuristic: the curve point farthest from the first-to-last chord.

    Offered as a convenience for eyeballing a cap; cap selection remains an
    empirical judgement call, not an algorithmic guarantee.
    """
    if len(curve) < 3:
        return curve[-1]
    pts = np.asarray(curve, dtype=float)
    start, end = pts[0], pts[-1]
    chord = end - start
    norm = np.linalg.norm(chord)
    if norm == 0:
        return curve[0]
    rel = pts - start
    distances = np.abs(rel[:, 0] * chord[1] - rel[:, 1] * chord[0]) / norm
    best = int(np.argmax(distances))
    return curve[best]
