"""Pydantic request/response models for the HTTP API."""
from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class UploadResponse(BaseModel):
    doc_id: str
    status: Literal["parsing", "scored", "failed"]


class SegmentView(BaseModel):
    id: str
    kind: str
    text: str
    page: Optional[int] = None
    order: int


class ReportView(BaseModel):
    doc_id: str
    status: str
    language: str
    segments: list[SegmentView]


class ReportSummary(BaseModel):
    doc_id: str
    status: str
    n_segments: int


class RecommendationItem(BaseModel):
    segment_id: str
    score: float
    text: str
    page: Optional[int] = None
    order: int


class RecommendationResponse(BaseModel):
    doc_id: str
    req_id: str
    k: int
    items: list[RecommendationItem]


class RequirementView(BaseModel):
    req_id: str
    title: str
    description: str


class CategoryGroup(BaseModel):
    category: str
    requirements: list[RequirementView]


class CatalogResponse(BaseModel):
    name: str
    categories: list[CategoryGroup]


class FeedbackRequest(BaseModel):
    doc_id: str
    req_id: str
    segment_id: str
    verdict: Literal["relevant", "irrelevant"]
    client: str = Field(default="webui", max_length=64)


class FeedbackResponse(BaseModel):
    event_id: str


class ErrorResponse(BaseModel):
    error: str
    category: str
