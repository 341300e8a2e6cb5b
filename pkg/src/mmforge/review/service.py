"""HTTP surface over a ReviewStore.

Endpoints (JSON bodies):
    GET  /items?status=pending&page=P&size=S
    POST /items/{id}/decision        (reviewer taken from the X-Reviewer header)
    GET  /export?allow_pending=true|false
    GET  /stats

Authentication is deliberately just the reviewer-name header; anything
stronger is out of scope for a desk-scale curation loop.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, Header, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .store import (
    DecisionRecord,
    PendingItemsError,
    ReviewStore,
    UnknownItemError,
    ValidationError,
)


class DecisionBody(BaseModel):
    decision: str
    edited_answer: int | None = None
    edited_choices: list | None = None
    edited_prompt: str | None = None
    idempotency_key: str | None = None


def create_app(store: ReviewStore, static_dir: str | os.PathLike | None = None) -> FastAPI:
    app = FastAPI(title="review-service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/items")
    def list_items(
        status: str | None = Query(default=None),
        page: int = Query(default=1),
        size: int = Query(default=50),
    ):
        try:
            return store.list_items(status=status, page=page, size=size)
        except ValidationError as err:
            return JSONResponse(status_code=400, content={"error": str(err)})

    @app.post("/items/{item_id}/decision")
    def submit_decision(
        item_id: str,
        body: DecisionBody,
        x_reviewer: str | None = Header(default=None),
    ):
        if not x_reviewer:
            return JSONResponse(status_code=401, content={"error": "missing X-Reviewer header"})
        record = DecisionRecord(
            item_id=item_id,
            decision=body.decision,
            reviewer=x_reviewer,
            edited_answer=body.edited_answer,
            edited_choices=body.edited_choices,
            edited_prompt=body.edited_prompt,
            idempotency_key=body.idempotency_key,
        )
        try:
            return store.submit_decision(record)
        except UnknownItemError as err:
            return JSONResponse(status_code=404, content={"error": str(err)})
        except ValidationError as err:
            return JSONResponse(status_code=400, content={"error": str(err)})

    @app.get("/export")
    def export(allow_pending: bool = Query(default=False)):
        try:
            return store.export(allow_pending=allow_pending)
        except PendingItemsError as err:
            return JSONResponse(status_code=409, content={"error": str(err), "pending": err.count})

    @app.get("/stats")
    def stats():
        return store.stats()

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
