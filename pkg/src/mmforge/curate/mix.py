"""Category-ratio mixing with proportional shortfall redistribution."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pool import CATEGORIES, CuratorConfig, DataPool


@dataclass(frozen=True)
class MixResult:
    pool: DataPool
    allocations: dict[str, int]  # records actually drawn per category
    targets: dict[str, int]  # round(ratio * N) quotas before availability
    shortfalls: dict[str, int]  # target minus allocation, where positive


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _initial_targets(ratios: dict[str, float], n: int) -> dict[str, int]:
    # round(ratio * N), then nudge the targets with the largest rounding
    # residue so the quotas sum to exactly N
    targets = {c: _round_half_up(ratios.get(c, 0.0) * n) for c in CATEGORIES}
    diff = n - sum(targets.values())
    if diff != 0:
        eligible = [c for c in CATEGORIES if ratios.get(c, 0.0) > 0]
        residue = {c: ratios.get(c, 0.0) * n - targets[c] for c in eligible}
        order = sorted(eligible, key=lambda c: (-residue[c] if diff > 0 else residue[c], c))
        step = 1 if diff > 0 else -1
        i = 0
        while diff != 0 and order:
            cat = order[i % len(order)]
            if step < 0 and targets[cat] == 0:
                i += 1
                continue
            targets[cat] += step
            diff -= step
            i += 1
    return targets


def _apportion(amount: int, weights: dict[str, float]) -> dict[str, int]:
    # largest-remainder split of `amount` across positive weights
    total_w = sum(weights.values())
    raw = {c: amount * w / total_w for c, w in weights.items()}
    base = {c: int(math.floor(v)) for c, v in raw.items()}
    left = amount - sum(base.values())
    for c in sorted(weights, key=lambda c: (-(raw[c] - base[c]), c)):
        if left <= 0:
            break
        base[c] += 1
        left -= 1
    return base


def mix_by_ratio(pool: DataPool, cfg: CuratorConfig) -> MixResult:
    """Sample target_size records matching the configured category ratios.

    Quotas are round(ratio * N) per category. A category that cannot fill
    its quota keeps everything it has; the missing amount is redistributed
    proportionally (by ratio) over categories with spare records and
    reported in the result. Sampling is uniform without replacement under
    the configured seed.
    """
    n = cfg.target_size
    if n > len(pool.records):
        raise ValueError(f"target_size {n} exceeds pool size {len(pool.records)}")
    available: dict[str, list[int]] = {c: [] for c in CATEGORIES}
    for idx, rec in enumerate(pool.records):
        available[rec.category].append(idx)
    for cat, ratio in cfg.ratios.items():
        if ratio > 0 and not available[cat]:
            raise ValueError(f"ratio requests category {cat!r} but the pool has none")

    targets = _initial_targets(cfg.ratios, n)
    alloc = {c: min(targets[c], len(available[c])) for c in CATEGORIES}
    shortfalls = {c: targets[c] - alloc[c] for c in CATEGORIES if targets[c] > alloc[c]}

    remaining = n - sum(alloc.values())
    while remaining > 0:
        spare = {c: len(available[c]) - alloc[c] for c in CATEGORIES}
        open_cats = {c: s for c, s in spare.items() if s > 0}
        if not open_cats:
            break
        weights = {c: cfg.ratios.get(c, 0.0) for c in open_cats}
        if sum(weights.values()) == 0:
            weights = {c: float(s) for c, s in open_cats.items()}
        shares = _apportion(remaining, weights)
        progressed = False
        for cat, share in shares.items():
            grant = min(share, open_cats[cat])
            if grant > 0:
                alloc[cat] += grant
                remaining -= grant
                progressed = True
        if not progressed:
            # all shares rounded to zero; hand one to the heaviest open category
            cat = max(open_cats, key=lambda c: (weights.get(c, 0.0), open_cats[c]))
            alloc[cat] += 1
            remaining -= 1

    rng = np.random.default_rng(cfg.seed)
    keep = np.zeros(len(pool.records), dtype=bool)
    for cat in CATEGORIES:
        want = alloc[cat]
        idxs = available[cat]
        if want == 0 or not idxs:
            continue
        chosen = rng.choice(len(idxs), size=want, replace=False)
        keep[np.asarray(idxs)[chosen]] = True
    records = [rec for rec, k in zip(pool.records, keep) if k]
    return MixResult(
        pool=DataPool(records),
        allocations={c: alloc[c] for c in CATEGORIES if alloc[c] > 0},
        targets={c: targets[c] for c in CATEGORIES if targets[c] > 0},
        shortfalls=shortfalls,
    )
