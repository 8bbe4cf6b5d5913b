"""HTTP annotation service: serves judging tasks and persists judgments.

State is an append-only JSONL store of accepted annotation records, so a
restart over the same store reproduces scheduling and exports exactly. All
writes go through one lock; media references are opaque strings the service
never interprets.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from pydantic import BaseModel

from .catalog import ItemId
from .errors import InputError, NotFoundError
from .judgments import (
    AnnotationRecord,
    JudgmentSet,
    append_annotation,
    justification_passes,
    qrels_from_annotations,
    read_annotations,
    save_qrels,
)
from .pooling import read_pools


@dataclass
class JudgingTask:
    task_id: str
    category: str
    target_id: ItemId
    candidates: list[ItemId]
    display_payloads: dict[ItemId, str]

    def to_json(self) -> dict:
        return {
            "task_id": self.task_id,
            "category": self.category,
            "target_id": self.target_id,
            "candidates": list(self.candidates),
            "display_payloads": dict(self.display_payloads),
        }


@dataclass
class Ack:
    accepted: bool
    reason: str | None = None

    def __post_init__(self):
        if self.accepted and self.reason is not None:
            raise InputError("accepted acks carry no reason")
        if not self.accepted and not self.reason:
            raise InputError("rejected acks must carry a reason")

    def to_json(self) -> dict:
        return {"accepted": self.accepted, "reason": self.reason}


class JudgingService:
    """Task scheduling, validation, persistence, and qrels export."""

    def __init__(
        self,
        pools: dict[str, dict[ItemId, list[ItemId]]],
        store_path,
        media: dict[ItemId, str] | None = None,
        min_votes: int = 1,
    ):
        if not pools:
            raise InputError("service needs at least one category of pools")
        self.pools = pools
        self.store_path = Path(store_path)
        self.media = media or {}
        self.min_votes = min_votes
        self._lock = threading.Lock()
        self.records: list[AnnotationRecord] = (
            read_annotations(self.store_path) if self.store_path.exists() else []
        )
        self._target_category = {
            target: category for category, targets in pools.items() for target in targets
        }

    @classmethod
    def from_pool_files(cls, pool_files: dict[str, str], store_path, min_votes: int = 1):
        pools = {}
        for category, path in pool_files.items():
            pools[category] = {pool.target: pool.item_ids() for pool in read_pools(path)}
        return cls(pools, store_path=store_path, min_votes=min_votes)

    def categories(self) -> list[str]:
        return sorted(self.pools)

    def _payload(self, item_id: ItemId) -> str:
        return self.media.get(item_id, f"synthetic:{item_id}")

    def _judged_counts(self, category: str) -> dict[ItemId, int]:
        counts = {target: 0 for target in self.pools[category]}
        for rec in self.records:
            if rec.target_id in counts:
                counts[rec.target_id] += 1
        return counts

    def next_task(self, category: str, worker_id: str) -> JudgingTask | None:
        """Least-judged target this worker has not judged yet; ties by id."""
        if category not in self.pools:
            raise NotFoundError(f"unknown category: {category!r}")
        with self._lock:
            done = {rec.target_id for rec in self.records if rec.worker_id == worker_id}
            counts = self._judged_counts(category)
        candidates = [(count, target) for target, count in counts.items() if target not in done]
        if not candidates:
            return None
        _, target = min(candidates)
        pool = self.pools[category][target]
        return JudgingTask(
            task_id=f"{category}/{target}",
            category=category,
            target_id=target,
            candidates=list(pool),
            display_payloads={item: self._payload(item) for item in [target, *pool]},
        )

    def submit_judgment(self, record: AnnotationRecord) -> Ack:
        """Validate and durably append one judgment; rejections change nothing."""
        category = self._target_category.get(record.target_id)
        if category is None:
            return Ack(False, f"unknown target: {record.target_id}")
        pool = set(self.pools[category][record.target_id])
        if not set(record.selected) <= pool:
            return Ack(False, "selection outside the pooled candidates")
        if not justification_passes(record.justification):
            return Ack(False, "attention check failed: justification too short")
        with self._lock:
            if any(
                rec.worker_id == record.worker_id and rec.target_id == record.target_id
                for rec in self.records
            ):
                return Ack(False, "already judged")
            append_annotation(record, self.store_path)
            self.records.append(record)
        return Ack(True)

    def progress(self, category: str) -> dict:
        if category not in self.pools:
            raise NotFoundError(f"unknown category: {category!r}")
        with self._lock:
            counts = self._judged_counts(category)
        return {
            "category": category,
            "n_targets": len(counts),
            "n_records": sum(counts.values()),
            "n_judged": sum(1 for c in counts.values() if c > 0),
            "per_target": dict(sorted(counts.items())),
        }

    def export_qrels(self, min_votes: int | None = None, category: str | None = None) -> JudgmentSet:
        """Consolidate stored records into a binary judgment set."""
        with self._lock:
            records = list(self.records)
        if not records:
            raise InputError("no stored annotation records to export")
        votes = min_votes if min_votes is not None else self.min_votes
        categories = [category] if category else self.categories()
        entries: dict[ItemId, dict[ItemId, int]] = {}
        for cat in categories:
            if cat not in self.pools:
                raise NotFoundError(f"unknown category: {cat!r}")
            relevant_records = [r for r in records if self._target_category.get(r.target_id) == cat]
            judged = qrels_from_annotations(relevant_records, self.pools[cat], votes, category=cat)
            entries.update(judged.entries)
        label = category or "+".join(categories)
        return JudgmentSet(category=label, entries=entries)

    def export_qrels_file(self, path, min_votes: int | None = None, category: str | None = None) -> None:
        save_qrels(self.export_qrels(min_votes, category), path)


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


class AnnotationBody(BaseModel):
    worker_id: str
    target_id: str
    selected: list[str] = []
    justification: str = ""
    duration_ms: int = 0
    timestamp: str | None = None


def create_app(service: JudgingService, ui_dir=None):
    """FastAPI wiring over the service; the UI bundle is served at /."""
    from fastapi import FastAPI, Query, Response
    from fastapi.responses import JSONResponse, PlainTextResponse

    app = FastAPI(title="altereval judging service")

    @app.get("/api/categories")
    def categories():
        return service.categories()

    @app.get("/api/tasks/next")
    def next_task(category: str = Query(...), worker: str = Query(...)):
        try:
            task = service.next_task(category, worker)
        except NotFoundError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=404)
        if task is None:
            return Response(status_code=204)
        return task.to_json()

    @app.post("/api/judgments")
    def submit(body: AnnotationBody):
        try:
            record = AnnotationRecord(
                worker_id=body.worker_id,
                target_id=body.target_id,
                selected=tuple(body.selected),
                justification=body.justification,
                duration_ms=body.duration_ms,
                timestamp=body.timestamp or utc_now(),
            )
        except InputError as exc:
            return JSONResponse(Ack(False, str(exc)).to_json(), status_code=422)
        ack = service.submit_judgment(record)
        return JSONResponse(ack.to_json(), status_code=200 if ack.accepted else 422)

    @app.get("/api/progress")
    def progress(category: str = Query(...)):
        try:
            return service.progress(category)
        except NotFoundError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=404)

    @app.get("/api/export")
    def export(category: str | None = None, min_votes: int | None = None):
        try:
            judged = service.export_qrels(min_votes=min_votes, category=category)
        except (InputError, NotFoundError) as exc:
            return JSONResponse({"detail": str(exc)}, status_code=422)
        lines = [
            f"{target} 0 {candidate} {judged.entries[target][candidate]}"
            for target in sorted(judged.entries)
            for candidate in sorted(judged.entries[target])
        ]
        return PlainTextResponse("\n".join(lines) + ("\n" if lines else ""))

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
