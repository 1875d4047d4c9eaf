"""FastAPI application for the human-in-the-loop review workflow.

Upload a report, browse the requirement catalog by category, fetch per-
requirement top-K recommendations, and record reviewer verdicts. The active
model checkpoint is fixed at startup; swapping models means restarting.

Configuration comes from environment variables (all REPMATCH_*):
DATA_DIR, CHECKPOINT, CATALOG, MAX_UPLOAD_BYTES, HOST, PORT.
"""
from __future__ import annotations

import datetime
import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, File, Form, Query, Request, UploadFile
from fastapi.responses import JSONResponse, PlainTextResponse

from ..corpus import RequirementCatalog
from ..errors import NotFound, ParseError, RepmatchError, SchemaError
from ..ingest import IngestConfig, parse_dnk_html, parse_normalized_json, parse_plain_text, preprocess
from ..pipeline import ScoringPipeline
from ..ranking import rank
from . import schemas
from .store import ServiceStore


@dataclass
class ServiceSettings:
    data_dir: Path
    checkpoint_path: Path
    catalog_path: Path
    max_upload_bytes: int = 20 * 1024 * 1024

    @classmethod
    def from_env(cls) -> "ServiceSettings":
        return cls(
            data_dir=Path(os.environ.get("REPMATCH_DATA_DIR", "./repmatch-data")),
            checkpoint_path=Path(os.environ["REPMATCH_CHECKPOINT"]),
            catalog_path=Path(os.environ["REPMATCH_CATALOG"]),
            max_upload_bytes=int(os.environ.get("REPMATCH_MAX_UPLOAD_BYTES", 20 * 1024 * 1024)),
        )


def create_app(settings: ServiceSettings) -> FastAPI:
    catalog = RequirementCatalog.from_json_obj(
        json.loads(settings.catalog_path.read_text(encoding="utf-8")))
    pipeline = ScoringPipeline.load(settings.checkpoint_path)
    pipeline.check_catalog(catalog)
    store = ServiceStore(settings.data_dir)
    ingest_cfg = IngestConfig()

    app = FastAPI(title="repmatch review service", version="0.1.0")
    app.state.store = store
    app.state.catalog = catalog

    @app.exception_handler(RepmatchError)
    async def on_domain_error(request: Request, exc: RepmatchError):
        status = {"usage": 404 if isinstance(exc, NotFound) else 400,
                  "parse": 422, "numeric": 500, "io": 500}.get(exc.category, 500)
        return JSONResponse(status_code=status,
                            content={"error": str(exc), "category": exc.category})

    @app.post("/reports", response_model=schemas.UploadResponse, status_code=202)
    async def upload_report(file: UploadFile = File(...), format: str = Form("json")):
        raw = await file.read()
        if len(raw) > settings.max_upload_bytes:
            return JSONResponse(status_code=413,
                                content={"error": "upload too large", "category": "usage"})
        annotations = None
        if format == "json":
            doc = preprocess(parse_normalized_json(raw), ingest_cfg)
        elif format == "dnk-html":
            doc_id = "doc-" + hashlib.sha256(raw).hexdigest()[:12]
            doc, annotations = parse_dnk_html(raw, catalog, doc_id=doc_id)
        elif format == "text":
            doc_id = "doc-" + hashlib.sha256(raw).hexdigest()[:12]
            doc = preprocess(parse_plain_text(raw, doc_id), ingest_cfg)
        else:
            return JSONResponse(status_code=422,
                                content={"error": f"unsupported format {format!r}",
                                         "category": "usage"})
        scores = pipeline.score(doc)
        record = store.put_report(doc.doc_id, raw, doc, scores, annotations)
        return schemas.UploadResponse(doc_id=record.doc_id, status=record.status)

    @app.get("/reports", response_model=list[schemas.ReportSummary])
    def list_reports():
        return [
            schemas.ReportSummary(doc_id=r.doc_id, status=r.status,
                                  n_segments=len(r.document) if r.document else 0)
            for r in store.list_reports()
        ]

    @app.get("/reports/{doc_id}", response_model=schemas.ReportView)
    def get_report(doc_id: str):
        record = store.get_report(doc_id)
        return schemas.ReportView(
            doc_id=record.doc_id,
            status=record.status,
            language=record.document.language,
            segments=[
                schemas.SegmentView(id=s.id, kind=s.kind, text=s.text,
                                    page=s.page, order=s.order)
                for s in record.document.segments
            ],
        )

    @app.get("/reports/{doc_id}/recommendations",
             response_model=schemas.RecommendationResponse)
    def recommendations(doc_id: str, req: str, k: int = Query(default=3, ge=1, le=50)):
        record = store.get_report(doc_id)
        if record.status != "scored":
            return JSONResponse(status_code=409,
                                content={"error": f"document {doc_id} not scored yet",
                                         "category": "usage"})
        req_index = catalog.index_of(req)
        ranked = rank(record.scores, record.document, catalog, req_index, k)
        items = []
        for seg_id, score in ranked.items:
            seg = record.document.segment(seg_id)
            items.append(schemas.RecommendationItem(
                segment_id=seg_id, score=score, text=seg.text,
                page=seg.page, order=seg.order))
        return schemas.RecommendationResponse(doc_id=doc_id, req_id=req, k=k, items=items)

    @app.get("/requirements", response_model=schemas.CatalogResponse)
    def requirements():
        groups: dict[str, list] = {}
        for r in catalog:  # catalog order preserved within each category
            groups.setdefault(r.category, []).append(
                schemas.RequirementView(req_id=r.req_id, title=r.title,
                                        description=r.description))
        return schemas.CatalogResponse(
            name=catalog.name,
            categories=[schemas.CategoryGroup(category=c, requirements=reqs)
                        for c, reqs in groups.items()],
        )

    @app.post("/feedback", response_model=schemas.FeedbackResponse)
    def feedback(event: schemas.FeedbackRequest):
        record = store.get_report(event.doc_id)  # 404 if unknown
        if event.req_id not in catalog:
            return JSONResponse(status_code=422,
                                content={"error": f"unknown requirement {event.req_id!r}",
                                         "category": "usage"})
        try:
            record.document.segment(event.segment_id)
        except NotFound:
            return JSONResponse(status_code=422,
                                content={"error": f"unknown segment {event.segment_id!r}",
                                         "category": "usage"})
        event_id = store.append_feedback({
            "doc_id": event.doc_id,
            "req_id": event.req_id,
            "segment_id": event.segment_id,
            "verdict": event.verdict,
            "client": event.client,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        })
        return schemas.FeedbackResponse(event_id=event_id)

    @app.get("/feedback/export", response_class=PlainTextResponse)
    def export_feedback(mode: str = "events"):
        if mode == "deltas":
            rows = store.feedback_deltas()
        else:
            rows = list(store.iter_feedback())
        body = "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
        return PlainTextResponse(body, media_type="application/x-ndjson")

    return app


def app_from_env() -> FastAPI:
    return create_app(ServiceSettings.from_env())
