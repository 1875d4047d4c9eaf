"""Per-requirement top-K recommendation lists from a document score matrix.

Requirement-to-segments direction: for one fixed requirement, all segments
of a document are ordered by predicted relevance. Ties break by document
reading order, which is what an auditor scanning front-to-back expects.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Document, RequirementCatalog
from .errors import InvalidInput, NotFound, ShapeError


class ScoreMatrix:
    """N x M relevance probabilities; rows in segment order, columns in
    catalog order."""

    def __init__(self, doc_id: str, scores: np.ndarray):
        scores = np.asarray(scores, dtype=np.float64)
        if scores.ndim != 2:
            raise ShapeError("scores must be 2-D")
        if not np.all(np.isfinite(scores)):
            raise ShapeError("scores must be finite")
        self.doc_id = doc_id
        self.scores = scores

    @property
    def n_segments(self):
        return self.scores.shape[0]

    @property
    def n_requirements(self):
        return self.scores.shape[1]


@dataclass(frozen=True)
class RecommendationList:
    req_id: str
    items: tuple[tuple[str, float], ...]  # (segment_id, score), score non-increasing

    def to_json_obj(self) -> dict:
        return {
            "req_id": self.req_id,
            "items": [{"segment_id": s, "score": v} for s, v in self.items],
        }


def rank(scores: ScoreMatrix, doc: Document, catalog: RequirementCatalog,
         req_index: int, k: int) -> RecommendationList:
    """Top min(k, N) segments for one requirement, scores descending."""
    if k < 1:
        raise InvalidInput("k must be >= 1")
    if not 0 <= req_index < scores.n_requirements:
        raise NotFound(f"requirement index {req_index} out of range")
    if scores.n_segments != len(doc) or scores.n_requirements != len(catalog):
        raise ShapeError("score matrix does not match document/catalog")
    column = scores.scores[:, req_index]
    # stable sort on negated scores: ties keep ascending segment order
    order = np.argsort(-column, kind="stable")[: min(k, len(column))]
    items = tuple((doc.segments[i].id, float(column[i])) for i in order)
    return RecommendationList(catalog.requirements[req_index].req_id, items)


def rank_all(scores: ScoreMatrix, doc: Document, catalog: RequirementCatalog,
             k: int) -> list[RecommendationList]:
    return [rank(scores, doc, catalog, j, k) for j in range(len(catalog))]
