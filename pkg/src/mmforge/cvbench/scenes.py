"""Annotated scene records, one JSON object per line."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

SOURCES = ("coco-like", "ade-like", "omni3d-like")

Point3 = tuple[float, float, float]


@dataclass(frozen=True)
class SceneObject:
    category: str
    bbox2d: tuple[float, float, float, float]  # x, y, w, h in pixels
    corners3d: tuple[Point3, ...] | None = None  # 8 camera-frame points, meters

    def __post_init__(self):
        x, y, w, h = self.bbox2d
        if w <= 0 or h <= 0:
            raise ValueError(f"bbox2d must have positive extent, got {self.bbox2d}")
        if self.corners3d is not None and len(self.corners3d) != 8:
            raise ValueError(f"corners3d needs exactly 8 points, got {len(self.corners3d)}")

    @property
    def center2d(self) -> tuple[float, float]:
        x, y, w, h = self.bbox2d
        return (x + w / 2.0, y + h / 2.0)


@dataclass(frozen=True)
class Scene:
    id: str
    source: str
    objects: tuple[SceneObject, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"scene source must be one of {SOURCES}, got {self.source!r}")

    def categories(self) -> list[str]:
        """Distinct categories in first-appearance order."""
        seen: list[str] = []
        for obj in self.objects:
            if obj.category not in seen:
                seen.append(obj.category)
        return seen


def loads_scene(line: str) -> Scene:
    raw = json.loads(line)
    objects = []
    for entry in raw.get("objects", []):
        corners = entry.get("corners3d")
        objects.append(
            SceneObject(
                category=entry["category"],
                bbox2d=tuple(float(v) for v in entry["bbox2d"]),
                corners3d=tuple(tuple(float(c) for c in p) for p in corners) if corners else None,
            )
        )
    return Scene(id=str(raw["id"]), source=raw["source"], objects=tuple(objects))


def scene_to_json(scene: Scene) -> str:
    return json.dumps(
        {
            "id": scene.id,
            "source": scene.source,
            "objects": [
                {
                    "category": o.category,
                    "bbox2d": list(o.bbox2d),
                    **({"corners3d": [list(p) for p in o.corners3d]} if o.corners3d else {}),
                }
                for o in scene.objects
            ],
        },
        sort_keys=True,
    )


def load_scenes(path: str | os.PathLike) -> list[Scene]:
    scenes = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                scenes.append(loads_scene(line))
            except (KeyError, ValueError, json.JSONDecodeError) as err:
                raise ValueError(f"{path}:{lineno}: bad scene record: {err}") from err
    return scenes
