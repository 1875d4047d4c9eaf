"""Canonical data model: documents, requirements, annotations, dataset splits.

All types are frozen after construction and safe to share between threads.
Label-vector column order is always the catalog order, so any artifact that
produces per-requirement scores must be persisted together with the catalog
fingerprint it was trained against.
"""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInput, NotFound, SchemaError

SEGMENT_KINDS = frozenset({
    "title", "paragraph", "enumeration", "table", "diagram",
    "footer", "header", "toc", "pagination", "other",
})

# Segment types that carry report content; everything else is layout noise.
CONSIDERED_KINDS = frozenset({"title", "paragraph", "enumeration", "table", "diagram"})


@dataclass(frozen=True)
class Segment:
    id: str
    kind: str
    text: str
    order: int
    page: int | None = None

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise SchemaError(f"unknown segment kind {self.kind!r}")
        if self.page is not None and self.page < 1:
            raise SchemaError(f"segment {self.id}: page must be positive")


@dataclass(frozen=True)
class Document:
    doc_id: str
    segments: tuple[Segment, ...]
    source_format: str = "json"
    language: str = "de"

    def __post_init__(self):
        if not self.segments:
            raise SchemaError(f"document {self.doc_id} has no segments")
        ids = [s.id for s in self.segments]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise SchemaError(f"document {self.doc_id}: duplicate segment id {dup!r}")
        orders = [s.order for s in self.segments]
        if orders != list(range(len(self.segments))):
            raise SchemaError(f"document {self.doc_id}: segment order is not 0..N-1")

    def __len__(self):
        return len(self.segments)

    def segment(self, seg_id: str) -> Segment:
        for s in self.segments:
            if s.id == seg_id:
                return s
        raise NotFound(f"segment {seg_id!r} not in document {self.doc_id}")

    def to_json_obj(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "language": self.language,
            "segments": [
                {"id": s.id, "kind": s.kind, "text": s.text, "page": s.page, "order": s.order}
                for s in self.segments
            ],
        }


@dataclass(frozen=True)
class Requirement:
    req_id: str
    category: str
    title: str
    description: str = ""


class RequirementCatalog:
    """Ordered, immutable list of requirements; order defines label columns."""

    def __init__(self, requirements: Iterable[Requirement], name: str = "catalog"):
        self.requirements = tuple(requirements)
        self.name = name
        if not self.requirements:
            raise SchemaError("catalog must contain at least one requirement")
        self._index = {r.req_id: j for j, r in enumerate(self.requirements)}
        if len(self._index) != len(self.requirements):
            raise SchemaError("duplicate req_id in catalog")

    def __len__(self):
        return len(self.requirements)

    def __iter__(self):
        return iter(self.requirements)

    def __contains__(self, req_id: str):
        return req_id in self._index

    def index_of(self, req_id: str) -> int:
        try:
            return self._index[req_id]
        except KeyError:
            raise NotFound(f"requirement {req_id!r} not in catalog {self.name!r}") from None

    def fingerprint(self) -> str:
        payload = json.dumps([r.req_id for r in self.requirements]).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    @classmethod
    def from_json_obj(cls, obj, name: str = "catalog") -> "RequirementCatalog":
        reqs = [
            Requirement(
                req_id=r["req_id"],
                category=r.get("category", "other"),
                title=r.get("title", r["req_id"]),
                description=r.get("description", ""),
            )
            for r in obj
        ]
        return cls(reqs, name=name)

    def to_json_obj(self) -> list[dict]:
        return [
            {"req_id": r.req_id, "category": r.category, "title": r.title, "description": r.description}
            for r in self.requirements
        ]


class AnnotationSet:
    """Ground-truth (segment_id, req_id) links for one document."""

    def __init__(self, doc_id: str, links: Iterable[tuple[str, str]]):
        self.doc_id = doc_id
        self.links = frozenset((str(s), str(r)) for s, r in links)

    def validate(self, doc: Document, catalog: RequirementCatalog) -> None:
        seg_ids = {s.id for s in doc.segments}
        for seg_id, req_id in self.links:
            if seg_id not in seg_ids:
                raise SchemaError(f"annotation references unknown segment {seg_id!r}")
            if req_id not in catalog:
                raise SchemaError(f"annotation references unknown requirement {req_id!r}")

    def requirements_for(self, seg_id: str) -> set[str]:
        return {r for s, r in self.links if s == seg_id}

    def segments_for(self, req_id: str) -> set[str]:
        return {s for s, r in self.links if r == req_id}

    def to_json_obj(self) -> dict:
        return {"doc_id": self.doc_id, "links": sorted(map(list, self.links))}

    @classmethod
    def from_json_obj(cls, obj) -> "AnnotationSet":
        return cls(obj["doc_id"], [(s, r) for s, r in obj["links"]])


@dataclass(frozen=True)
class DatasetSplit:
    train: frozenset[str]
    valid: frozenset[str]
    test: frozenset[str]
    seed: int

    def subset_of(self, doc_id: str) -> str:
        for name in ("train", "valid", "test"):
            if doc_id in getattr(self, name):
                return name
        raise NotFound(f"{doc_id!r} not in split")

    def to_json_obj(self) -> dict:
        return {
            "train": sorted(self.train),
            "valid": sorted(self.valid),
            "test": sorted(self.test),
            "seed": self.seed,
        }


def label_vector(doc: Document, seg_id: str, ann: AnnotationSet,
                 catalog: RequirementCatalog) -> np.ndarray:
    """Binary target vector of length M for one segment, in catalog order."""
    doc.segment(seg_id)  # raises NotFound for unknown ids
    y = np.zeros(len(catalog), dtype=np.float64)
    for req_id in ann.requirements_for(seg_id):
        if req_id in catalog:
            y[catalog.index_of(req_id)] = 1.0
    return y


def make_split(doc_ids: Sequence[str], ratios: tuple[float, float, float],
               seed: int) -> DatasetSplit:
    """Deterministic document-level split. Sizes are floor-based for valid and
    test; the remainder goes to train."""
    r_train, r_valid, r_test = ratios
    if min(ratios) <= 0 or abs(sum(ratios) - 1.0) > 1e-9:
        raise InvalidInput("split ratios must be positive and sum to 1")
    if len(doc_ids) < 3:
        raise InvalidInput("need at least 3 documents to split")
    if len(set(doc_ids)) != len(doc_ids):
        raise InvalidInput("doc_ids must be unique")

    n = len(doc_ids)
    # Tolerance absorbs float artifacts like 3 * (1/3) = 0.9999999999999999.
    n_valid = int(n * r_valid + 1e-9)
    n_test = int(n * r_test + 1e-9)
    shuffled = list(doc_ids)
    random.Random(seed).shuffle(shuffled)
    valid = shuffled[:n_valid]
    test = shuffled[n_valid:n_valid + n_test]
    train = shuffled[n_valid + n_test:]
    return DatasetSplit(frozenset(train), frozenset(valid), frozenset(test), seed)
