"""On-disk persistence for the review service.

Self-contained layout under one data directory, no external database:

    blobs/<doc_id>        original upload bytes
    docs/<doc_id>.json    parsed document
    anns/<doc_id>.json    reference annotations (DNK uploads only)
    scores/<doc_id>.json  score matrix
    feedback.jsonl        append-only feedback event log

Writes go through a single lock; everything read back is immutable.
"""
from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..corpus import AnnotationSet, Document
from ..errors import NotFound
from ..ingest import parse_normalized_json
from ..ranking import ScoreMatrix


@dataclass
class ReportRecord:
    doc_id: str
    status: str  # parsing | scored | failed
    document: Document | None = None
    scores: ScoreMatrix | None = None
    reference_annotations: AnnotationSet | None = None


class ServiceStore:
    def __init__(self, data_dir):
        self.root = Path(data_dir)
        for sub in ("blobs", "docs", "anns", "scores"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._reports: dict[str, ReportRecord] = {}
        self._feedback_count = 0
        self._load()

    def _load(self):
        for path in sorted((self.root / "docs").glob("*.json")):
            doc = parse_normalized_json(path.read_bytes())
            record = ReportRecord(doc_id=doc.doc_id, status="scored", document=doc)
            scores_path = self.root / "scores" / path.name
            if scores_path.exists():
                obj = json.loads(scores_path.read_text())
                record.scores = ScoreMatrix(doc.doc_id, np.array(obj["scores"]))
            else:
                record.status = "parsing"
            ann_path = self.root / "anns" / path.name
            if ann_path.exists():
                record.reference_annotations = AnnotationSet.from_json_obj(
                    json.loads(ann_path.read_text()))
            self._reports[doc.doc_id] = record
        log = self.root / "feedback.jsonl"
        if log.exists():
            with log.open() as f:
                self._feedback_count = sum(1 for _ in f)

    def put_report(self, doc_id: str, raw: bytes, doc: Document, scores: ScoreMatrix,
                   annotations: AnnotationSet | None = None) -> ReportRecord:
        record = ReportRecord(doc_id, "scored", doc, scores, annotations)
        with self._lock:
            (self.root / "blobs" / doc_id).write_bytes(raw)
            (self.root / "docs" / f"{doc_id}.json").write_text(
                json.dumps(doc.to_json_obj()), encoding="utf-8")
            (self.root / "scores" / f"{doc_id}.json").write_text(
                json.dumps({"doc_id": doc_id, "scores": scores.scores.tolist()}))
            if annotations is not None:
                (self.root / "anns" / f"{doc_id}.json").write_text(
                    json.dumps(annotations.to_json_obj()))
            self._reports[doc_id] = record
        return record

    def get_report(self, doc_id: str) -> ReportRecord:
        try:
            return self._reports[doc_id]
        except KeyError:
            raise NotFound(f"unknown document {doc_id!r}") from None

    def list_reports(self) -> list[ReportRecord]:
        return list(self._reports.values())

    def append_feedback(self, event: dict) -> str:
        event_id = str(uuid.uuid4())
        payload = dict(event, event_id=event_id)
        with self._lock:
            with (self.root / "feedback.jsonl").open("a", encoding="utf-8") as f:
                f.write(json.dumps(payload, sort_keys=True) + "\n")
            self._feedback_count += 1
        return event_id

    def iter_feedback(self):
        log = self.root / "feedback.jsonl"
        if not log.exists():
            return
        with log.open(encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    yield json.loads(line)

    def feedback_deltas(self) -> list[dict]:
        """Latest-wins reduction per (doc_id, req_id, segment_id), as
        annotation deltas suitable for retraining exports."""
        latest: dict[tuple, dict] = {}
        for event in self.iter_feedback():
            key = (event["doc_id"], event["req_id"], event["segment_id"])
            latest[key] = event
        return [
            {
                "doc_id": e["doc_id"],
                "req_id": e["req_id"],
                "segment_id": e["segment_id"],
                "link": e["verdict"] == "relevant",
                "event_id": e["event_id"],
            }
            for e in sorted(latest.values(), key=lambda e: e["timestamp"])
        ]
