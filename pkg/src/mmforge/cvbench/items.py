"""Generated VQA items and their line-delimited serialization."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

TASKS = ("spatial_relationship", "object_count", "depth_order", "relative_distance")
STATUSES = ("pending", "accepted", "modified", "rejected")


@dataclass(frozen=True)
class Overlay:
    """A colored bounding box burned in later by a renderer; kept as metadata here."""

    bbox2d: tuple[float, float, float, float]
    color: str


@dataclass
class QuestionItem:
    id: str
    task: str
    prompt: str
    choices: list
    answer_index: int
    overlays: list[Overlay] = field(default_factory=list)
    status: str = "pending"
    edited_answer: int | None = None
    source: str | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}, got {self.status!r}")
        if not (0 <= self.answer_index < len(self.choices)):
            raise ValueError(
                f"answer_index {self.answer_index} out of range for {len(self.choices)} choices"
            )
        if self.task in ("depth_order", "relative_distance"):
            colors = [o.color for o in self.overlays]
            if len(colors) < 2 or len(set(colors)) != len(colors):
                raise ValueError(f"{self.task} items need >=2 overlays with distinct colors")

    @property
    def answer(self):
        return self.choices[self.answer_index]

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "task": self.task,
                "prompt": self.prompt,
                "choices": self.choices,
                "answer_index": self.answer_index,
                "overlays": [{"bbox2d": list(o.bbox2d), "color": o.color} for o in self.overlays],
                "status": self.status,
                "edited_answer": self.edited_answer,
                "source": self.source,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "QuestionItem":
        raw = json.loads(line)
        return cls(
            id=str(raw["id"]),
            task=raw["task"],
            prompt=raw["prompt"],
            choices=list(raw["choices"]),
            answer_index=int(raw["answer_index"]),
            overlays=[
                Overlay(bbox2d=tuple(float(v) for v in o["bbox2d"]), color=o["color"])
                for o in raw.get("overlays", [])
            ],
            status=raw.get("status", "pending"),
            edited_answer=raw.get("edited_answer"),
            source=raw.get("source"),
        )


def save_items(path: str | os.PathLike, items: list[QuestionItem]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(item.to_json() + "\n")


def load_items(path: str | os.PathLike) -> list[QuestionItem]:
    items = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                items.append(QuestionItem.from_json(line))
    return items
