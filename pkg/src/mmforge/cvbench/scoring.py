"""Benchmark scoring: equal weight to the 2D and 3D halves."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

TASK_LABELS = {
    "spatial_relationship": "Spatial Relationship",
    "object_count": "Object Count",
    "depth_order": "Depth Order",
    "relative_distance": "Relative Distance",
}
TWO_D_TASKS = ("spatial_relationship", "object_count")
THREE_D_TASKS = ("depth_order", "relative_distance")


@dataclass(frozen=True)
class GradedItem:
    id: str
    task: str
    source: str  # coco-like / ade-like / omni3d-like
    correct: bool


@dataclass(frozen=True)
class CvBenchScore:
    acc_coco: float
    acc_ade: float
    acc_3d: float
    acc_2d: float
    overall: float

    @classmethod
    def from_components(cls, acc_coco: float, acc_ade: float, acc_3d: float) -> "CvBenchScore":
        for name, v in (("acc_coco", acc_coco), ("acc_ade", acc_ade), ("acc_3d", acc_3d)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        acc_2d = (acc_coco + acc_ade) / 2.0
        overall = (acc_2d + acc_3d) / 2.0
        return cls(acc_coco=acc_coco, acc_ade=acc_ade, acc_3d=acc_3d, acc_2d=acc_2d, overall=overall)


def _accuracy(bucket: list[GradedItem], name: str) -> float:
    if not bucket:
        raise ValueError(f"empty grading bucket: {name}")
    return sum(1 for g in bucket if g.correct) / len(bucket)


def score_cvbench(graded: list[GradedItem]) -> CvBenchScore:
    """Bucket graded responses and apply the two-level averaging.

    2D accuracy averages the coco-like and ade-like buckets; the overall
    score averages the 2D and pooled-3D accuracies. Every referenced bucket
    must contain at least one graded item.
    """
    coco = [g for g in graded if g.task in TWO_D_TASKS and g.source == "coco-like"]
    ade = [g for g in graded if g.task in TWO_D_TASKS and g.source == "ade-like"]
    three_d = [g for g in graded if g.task in THREE_D_TASKS]
    return CvBenchScore.from_components(
        acc_coco=_accuracy(coco, "coco-like 2D"),
        acc_ade=_accuracy(ade, "ade-like 2D"),
        acc_3d=_accuracy(three_d, "3D"),
    )


def composition_summary(tasks: list[str]) -> str:
    """Counts per task plus a total, in the benchmark's breakdown layout."""
    counts = {task: 0 for task in TASK_LABELS}
    for task in tasks:
        if task in counts:
            counts[task] += 1
    width = max(len(label) for label in TASK_LABELS.values())
    lines = [f"{TASK_LABELS[task]:<{width}}  {count}" for task, count in counts.items()]
    lines.append(f"{'Total':<{width}}  {sum(counts.values())}")
    return "\n".join(lines)


def load_graded(path: str | os.PathLike) -> list[GradedItem]:
    graded = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            graded.append(
                GradedItem(
                    id=str(raw["id"]),
                    task=raw["task"],
                    source=raw["source"],
                    correct=bool(raw["correct"]),
                )
            )
    return graded
