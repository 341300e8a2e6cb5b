"""Train/test hash overlap reporting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .dhash import hamming64


@dataclass(frozen=True)
class LeakageRow:
    name: str
    test_size: int
    matches: int

    @property
    def pct(self) -> float:
        return self.matches / self.test_size if self.test_size else 0.0


@dataclass(frozen=True)
class LeakageReport:
    rows: tuple[LeakageRow, ...]

    @property
    def total(self) -> LeakageRow:
        return LeakageRow(
            name="Total",
            test_size=sum(r.test_size for r in self.rows),
            matches=sum(r.matches for r in self.rows),
        )

    def render_table(self) -> str:
        """Human table with `matches (pct%)` columns and a totals row."""
        rows = list(self.rows) + [self.total]
        name_w = max(len(r.name) for r in rows)
        lines = [f"{'Test Set':<{name_w}}  {'# Images':>10}  {'Matches':>18}"]
        for r in rows:
            lines.append(
                f"{r.name:<{name_w}}  {r.test_size:>10,}  {r.matches:>8,} ({r.pct * 100:.2f}%)"
            )
        return "\n".join(lines)

    def to_records(self) -> list[dict]:
        out = [
            {"test_set": r.name, "test_size": r.test_size, "matches": r.matches, "pct": r.pct}
            for r in self.rows
        ]
        t = self.total
        out.append({"test_set": t.name, "test_size": t.test_size, "matches": t.matches, "pct": t.pct})
        return out


def leakage_scan(
    train_hashes: Iterable[int],
    test_sets: Mapping[str, Iterable[int]],
    hamming_threshold: int = 0,
) -> LeakageReport:
    """Count test images whose hash collides with any training hash.

    The default match is exact 64-bit equality; a positive
    `hamming_threshold` switches to distance <= threshold (quadratic in set
    sizes, intended for small audits).
    """
    train = set(train_hashes)
    rows = []
    for name, hashes in test_sets.items():
        hash_list = list(hashes)
        if hamming_threshold <= 0:
            matches = sum(1 for h in hash_list if h in train)
        else:
            matches = sum(
                1 for h in hash_list if any(hamming64(h, t) <= hamming_threshold for t in train)
            )
        rows.append(LeakageRow(name=name, test_size=len(hash_list), matches=matches))
    return LeakageReport(rows=tuple(rows))
