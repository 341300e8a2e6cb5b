"""Question generators over annotated scenes.

All generators are pure per (scene, seed) so scene files can be processed in
parallel; seeds for a batch run derive deterministically from the global
seed and each scene id. The 3D generators take a separation offset in
meters: an item is only emitted when the competing objects' vertex distance
ranges are separated by more than the offset, so raising the offset can only
shrink the emitted set.
"""

from __future__ import annotations

import hashlib
from functools import lru_cache
from importlib import resources
from itertools import combinations
from math import dist

import numpy as np

from .items import Overlay, QuestionItem
from .scenes import Scene

DEFAULT_3D_OFFSET = 0.3  # meters; the emission rule requires an explicit separation margin

# Fallback vocabulary for existence-check counting questions.
DEFAULT_CATEGORY_POOL = (
    "person", "car", "chair", "dog", "cat", "table", "bicycle", "bird",
    "boat", "bottle", "cup", "horse", "sheep", "cow", "tv", "couch",
    "bed", "sink", "clock", "book",
)

_COLORS = ("red", "blue", "green")


@lru_cache(maxsize=1)
def prompt_templates() -> dict[str, str]:
    text = (
        resources.files("mmforge.cvbench").joinpath("templates/prompts_v1.txt").read_text("utf-8")
    )
    out: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, template = line.partition(":")
        out[key.strip()] = template.strip()
    return out


def derive_scene_seed(global_seed: int, scene_id: str) -> int:
    digest = hashlib.sha256(f"{global_seed}:{scene_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _pick(rng: np.random.Generator, values: list):
    return values[int(rng.integers(0, len(values)))]


# ---------------------------------------------------------------------------
# 2D: spatial relationship


def gen_spatial(scene: Scene, rng_seed: int) -> list[QuestionItem]:
    """Left/right or top/bottom question relative to an anchor object.

    Applies only to scenes showing exactly two distinct categories; the
    dominant center separation axis picks the question type. Both referenced
    instances get an overlay so multi-instance categories stay unambiguous.
    """
    cats = scene.categories()
    if len(cats) != 2:
        return []
    rng = np.random.default_rng(rng_seed)
    anchor_cat = _pick(rng, cats)
    other_cat = cats[0] if anchor_cat == cats[1] else cats[1]
    anchor = _pick(rng, [o for o in scene.objects if o.category == anchor_cat])
    other = _pick(rng, [o for o in scene.objects if o.category == other_cat])

    ax, ay = anchor.center2d
    ox, oy = other.center2d
    dx, dy = ox - ax, oy - ay
    if dx == 0 and dy == 0:
        return []
    if abs(dx) >= abs(dy):
        choices = ["left", "right"]
        answer = "right" if dx > 0 else "left"
        template = prompt_templates()["spatial_lr"]
    else:
        # image y grows downward
        choices = ["top", "bottom"]
        answer = "bottom" if dy > 0 else "top"
        template = prompt_templates()["spatial_tb"]
    prompt = template.format(object=other_cat, anchor=anchor_cat)
    return [
        QuestionItem(
            id=f"{scene.id}-spatial-0",
            task="spatial_relationship",
            prompt=prompt,
            choices=choices,
            answer_index=choices.index(answer),
            overlays=[
                Overlay(bbox2d=other.bbox2d, color=_COLORS[0]),
                Overlay(bbox2d=anchor.bbox2d, color=_COLORS[1]),
            ],
            source=scene.source,
        )
    ]


# ---------------------------------------------------------------------------
# 2D: object count


def _count_window(n: int) -> list[int]:
    # contiguous five-option window around n, shifted up so options stay >= 0
    lo = max(0, n - 2)
    return [lo + k for k in range(5)]


def gen_count(
    scene: Scene, rng_seed: int, category_pool: tuple[str, ...] = DEFAULT_CATEGORY_POOL
) -> list[QuestionItem]:
    """One counting question for a present category plus one existence check.

    Present-category options form a five-wide contiguous window containing
    the true count; existence checks ask about a category absent from the
    scene with correct answer 0.
    """
    rng = np.random.default_rng(rng_seed)
    counts: dict[str, int] = {}
    for obj in scene.objects:
        counts[obj.category] = counts.get(obj.category, 0) + 1

    items: list[QuestionItem] = []
    template = prompt_templates()["object_count"]
    if counts:
        cat = _pick(rng, list(counts))
        n = counts[cat]
        options = _count_window(n)
        items.append(
            QuestionItem(
                id=f"{scene.id}-count-0",
                task="object_count",
                prompt=template.format(category=cat),
                choices=options,
                answer_index=options.index(n),
                source=scene.source,
            )
        )
    absent = [c for c in category_pool if c not in counts]
    if absent:
        cat = _pick(rng, absent)
        options = _count_window(0)
        items.append(
            QuestionItem(
                id=f"{scene.id}-count-absent-0",
                task="object_count",
                prompt=template.format(category=cat),
                choices=options,
                answer_index=options.index(0),
                source=scene.source,
            )
        )
    return items


# ---------------------------------------------------------------------------
# 3D helpers


def _centroid(points) -> tuple[float, float, float]:
    xs, ys, zs = zip(*points)
    n = len(points)
    return (sum(xs) / n, sum(ys) / n, sum(zs) / n)


_ORIGIN = (0.0, 0.0, 0.0)


def _range_to(points, reference) -> tuple[float, float]:
    distances = [dist(p, reference) for p in points]
    return min(distances), max(distances)


# ---------------------------------------------------------------------------
# 3D: depth order


def gen_depth_order(scene: Scene, offset: float = DEFAULT_3D_OFFSET) -> list[QuestionItem]:
    """Which of two boxed objects is closer to the camera.

    Emitted only when one object's farthest vertex is nearer (by more than
    `offset`) than the other's nearest vertex, all distances Euclidean from
    the camera origin. Overlapping ranges yield no item.
    """
    boxed = [o for o in scene.objects if o.corners3d]
    items: list[QuestionItem] = []
    template = prompt_templates()["depth_order"]
    for idx, (a, b) in enumerate(combinations(boxed, 2)):
        if a.category == b.category:
            continue
        a_min, a_max = _range_to(a.corners3d, _ORIGIN)
        b_min, b_max = _range_to(b.corners3d, _ORIGIN)
        if a_max + offset < b_min:
            answer_index = 0
        elif b_max + offset < a_min:
            answer_index = 1
        else:
            continue
        items.append(
            QuestionItem(
                id=f"{scene.id}-depth-{idx}",
                task="depth_order",
                prompt=template.format(
                    a=a.category, b=b.category, a_color=_COLORS[0], b_color=_COLORS[1]
                ),
                choices=[a.category, b.category],
                answer_index=answer_index,
                overlays=[
                    Overlay(bbox2d=a.bbox2d, color=_COLORS[0]),
                    Overlay(bbox2d=b.bbox2d, color=_COLORS[1]),
                ],
                source=scene.source,
            )
        )
    return items


# ---------------------------------------------------------------------------
# 3D: relative distance


def gen_relative_distance(scene: Scene, offset: float = DEFAULT_3D_OFFSET) -> list[QuestionItem]:
    """Which of two boxed objects is closer to a boxed anchor object.

    Distances run from each candidate's vertices to the anchor's 3D
    centroid; emission needs the candidates' distance ranges separated by
    more than `offset`. All three categories must be distinct.
    """
    boxed = [o for o in scene.objects if o.corners3d]
    items: list[QuestionItem] = []
    template = prompt_templates()["relative_distance"]
    counter = 0
    for anchor in boxed:
        others = [o for o in boxed if o is not anchor]
        anchor_c = _centroid(anchor.corners3d)
        for a, b in combinations(others, 2):
            if len({anchor.category, a.category, b.category}) != 3:
                continue
            a_min, a_max = _range_to(a.corners3d, anchor_c)
            b_min, b_max = _range_to(b.corners3d, anchor_c)
            if a_max + offset < b_min:
                answer_index = 0
            elif b_max + offset < a_min:
                answer_index = 1
            else:
                continue
            items.append(
                QuestionItem(
                    id=f"{scene.id}-reldist-{counter}",
                    task="relative_distance",
                    prompt=template.format(
                        anchor=anchor.category,
                        anchor_color=_COLORS[0],
                        a=a.category,
                        b=b.category,
                        a_color=_COLORS[1],
                        b_color=_COLORS[2],
                    ),
                    choices=[a.category, b.category],
                    answer_index=answer_index,
                    overlays=[
                        Overlay(bbox2d=anchor.bbox2d, color=_COLORS[0]),
                        Overlay(bbox2d=a.bbox2d, color=_COLORS[1]),
                        Overlay(bbox2d=b.bbox2d, color=_COLORS[2]),
                    ],
                    source=scene.source,
                )
            )
            counter += 1
    return items


def generate_all(
    scenes: list[Scene],
    global_seed: int = 0,
    offset_3d: float = DEFAULT_3D_OFFSET,
) -> list[QuestionItem]:
    """Run every generator over a scene batch with per-scene derived seeds."""
    items: list[QuestionItem] = []
    for scene in scenes:
        seed = derive_scene_seed(global_seed, scene.id)
        items.extend(gen_spatial(scene, seed))
        items.extend(gen_count(scene, seed))
        items.extend(gen_depth_order(scene, offset_3d))
        items.extend(gen_relative_distance(scene, offset_3d))
    return items
