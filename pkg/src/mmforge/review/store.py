"""Decision persistence: immutable source items plus an append-only journal.

The journal is the single source of truth for review state. Every accepted
write is one JSON line; rebuilding a store from the same journal reproduces
identical effective statuses, and the latest record per item wins. Writes
are serialized by a lock so concurrent submissions cannot interleave or
drop lines; reads work on snapshots.
"""

from __future__ import annotations

import json
import math
import os
import threading
import time
from dataclasses import dataclass, field

from ..cvbench.items import QuestionItem, load_items
from ..cvbench.scoring import composition_summary

DECISIONS = ("accepted", "modified", "rejected")


class UnknownItemError(KeyError):
    pass


class ValidationError(ValueError):
    pass


class PendingItemsError(RuntimeError):
    def __init__(self, count: int):
        super().__init__(f"{count} item(s) still pending; export with allow_pending to override")
        self.count = count


@dataclass(frozen=True)
class DecisionRecord:
    item_id: str
    decision: str
    reviewer: str
    timestamp: float = field(default_factory=time.time)
    edited_answer: int | None = None
    edited_choices: list | None = None
    edited_prompt: str | None = None
    idempotency_key: str | None = None

    def edits(self) -> dict:
        out = {}
        if self.edited_answer is not None:
            out["answer_index"] = self.edited_answer
        if self.edited_choices is not None:
            out["choices"] = self.edited_choices
        if self.edited_prompt is not None:
            out["prompt"] = self.edited_prompt
        return out

    def to_json(self) -> str:
        return json.dumps(
            {
                "item_id": self.item_id,
                "decision": self.decision,
                "reviewer": self.reviewer,
                "timestamp": self.timestamp,
                "edited_answer": self.edited_answer,
                "edited_choices": self.edited_choices,
                "edited_prompt": self.edited_prompt,
                "idempotency_key": self.idempotency_key,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "DecisionRecord":
        raw = json.loads(line)
        return cls(
            item_id=str(raw["item_id"]),
            decision=raw["decision"],
            reviewer=raw.get("reviewer", ""),
            timestamp=float(raw.get("timestamp", 0.0)),
            edited_answer=raw.get("edited_answer"),
            edited_choices=raw.get("edited_choices"),
            edited_prompt=raw.get("edited_prompt"),
            idempotency_key=raw.get("idempotency_key"),
        )


class ReviewStore:
    def __init__(self, items: list[QuestionItem], journal_path: str | os.PathLike):
        self._items: dict[str, QuestionItem] = {}
        for item in items:
            if item.id in self._items:
                raise ValidationError(f"duplicate item id {item.id!r} in source items")
            self._items[item.id] = item
        self._order = sorted(self._items)
        self._journal_path = str(journal_path)
        self._lock = threading.Lock()
        self._latest: dict[str, DecisionRecord] = {}
        self._seen_keys: set[str] = set()
        self._replay()

    @classmethod
    def open(cls, items_path: str | os.PathLike, journal_path: str | os.PathLike) -> "ReviewStore":
        return cls(load_items(items_path), journal_path)

    def _replay(self) -> None:
        if not os.path.exists(self._journal_path):
            return
        with open(self._journal_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = DecisionRecord.from_json(line)
                if record.item_id in self._items:
                    self._latest[record.item_id] = record
                if record.idempotency_key:
                    self._seen_keys.add(record.idempotency_key)

    # ------------------------------------------------------------------
    def _validate(self, record: DecisionRecord) -> None:
        if record.item_id not in self._items:
            raise UnknownItemError(f"unknown item {record.item_id!r}")
        if record.decision not in DECISIONS:
            raise ValidationError(f"decision must be one of {DECISIONS}, got {record.decision!r}")
        edits = record.edits()
        if record.decision == "modified" and not edits:
            raise ValidationError("modified decisions must carry an edit payload")
        if record.decision != "modified" and edits:
            raise ValidationError(f"{record.decision} decisions must not carry edits")
        if record.decision == "modified" and record.edited_answer is not None:
            choices = (
                record.edited_choices
                if record.edited_choices is not None
                else self._items[record.item_id].choices
            )
            if not (0 <= record.edited_answer < len(choices)):
                raise ValidationError(
                    f"edited_answer {record.edited_answer} out of range for {len(choices)} choices"
                )

    def submit_decision(self, record: DecisionRecord) -> dict:
        """Validate, journal, and apply one decision; resubmission is latest-wins.

        A record whose idempotency key was already journalled is acknowledged
        without a second append.
        """
        self._validate(record)
        with self._lock:
            if record.idempotency_key and record.idempotency_key in self._seen_keys:
                current = self._latest.get(record.item_id)
                return {
                    "item_id": record.item_id,
                    "status": current.decision if current else "pending",
                    "duplicate": True,
                }
            with open(self._journal_path, "a", encoding="utf-8") as fh:
                fh.write(record.to_json() + "\n")
                fh.flush()
            self._latest[record.item_id] = record
            if record.idempotency_key:
                self._seen_keys.add(record.idempotency_key)
        return {"item_id": record.item_id, "status": record.decision, "duplicate": False}

    # ------------------------------------------------------------------
    def effective_status(self, item_id: str) -> str:
        if item_id not in self._items:
            raise UnknownItemError(f"unknown item {item_id!r}")
        record = self._latest.get(item_id)
        return record.decision if record else "pending"

    def get_item(self, item_id: str) -> QuestionItem:
        if item_id not in self._items:
            raise UnknownItemError(f"unknown item {item_id!r}")
        return self._items[item_id]

    def list_items(self, status: str | None = None, page: int = 1, size: int = 50) -> dict:
        """Stable id-ordered page of items with their effective statuses."""
        if page < 1 or size < 1:
            raise ValidationError(f"page and size must be >= 1, got page={page} size={size}")
        if status is not None and status not in DECISIONS + ("pending",):
            raise ValidationError(f"unknown status filter {status!r}")
        selected = [
            iid for iid in self._order if status is None or self.effective_status(iid) == status
        ]
        total = len(selected)
        pages = max(1, math.ceil(total / size))
        start = (page - 1) * size
        window = selected[start : start + size]
        return {
            "items": [self._view(iid) for iid in window],
            "total": total,
            "page": page,
            "size": size,
            "pages": pages,
        }

    def _view(self, item_id: str) -> dict:
        item = self._items[item_id]
        raw = json.loads(item.to_json())
        raw["status"] = self.effective_status(item_id)
        return raw

    def stats(self) -> dict:
        counts = {"pending": 0, "accepted": 0, "modified": 0, "rejected": 0}
        for iid in self._order:
            counts[self.effective_status(iid)] += 1
        counts["total"] = len(self._order)
        return counts

    # ------------------------------------------------------------------
    def export(self, allow_pending: bool = False) -> dict:
        """Finalized benchmark: accepted items verbatim, modified with edits applied.

        Rejected and pending items are excluded; pending items block the
        export unless explicitly allowed.
        """
        pending = [iid for iid in self._order if self.effective_status(iid) == "pending"]
        if pending and not allow_pending:
            raise PendingItemsError(len(pending))
        exported = []
        for iid in self._order:
            record = self._latest.get(iid)
            if record is None or record.decision == "rejected":
                continue
            raw = json.loads(self._items[iid].to_json())
            raw["status"] = record.decision
            edits = record.edits()
            for key, value in edits.items():
                raw[key] = value
            raw["edited_fields"] = sorted(edits)
            exported.append(raw)
        summary = composition_summary([raw["task"] for raw in exported])
        return {"items": exported, "summary": summary, "count": len(exported)}
