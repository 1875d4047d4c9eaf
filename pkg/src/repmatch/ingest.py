"""Parsers for raw report files plus the textual cleanup pass.

Three input formats are supported:

* normalized JSON (the canonical exchange format, see `corpus`),
* DNK-style HTML, where each requirement section heading is followed by the
  text blocks answering that requirement (yields annotations for free),
* plain text, one paragraph per blank-line-separated block.

Visual PDF segmentation is out of scope; external parsers are expected to
emit the normalized JSON format.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser

from .corpus import CONSIDERED_KINDS, AnnotationSet, Document, RequirementCatalog, Segment
from .errors import ParseError, SchemaError

# letter-hyphen-linebreak-letter: a word split across lines
_HYPHEN_BREAK = re.compile(r"(?<=[^\W\d_])-\n(?=[^\W\d_])", re.UNICODE)
# same split, but the left side ends in a digit-bearing token ("CO2-\nBilanz"):
# join the lines but keep the hyphen
_HYPHEN_BREAK_KEEP = re.compile(r"-\n(?=\S)")


@dataclass(frozen=True)
class IngestConfig:
    considered_kinds: frozenset = frozenset(CONSIDERED_KINDS)
    dehyphenate: bool = True
    min_chars: int = 1

    def __post_init__(self):
        if not self.considered_kinds:
            raise SchemaError("considered_kinds must be non-empty")


def dehyphenate(text: str) -> str:
    """Rejoin words split by line-break hyphens.

    Alphabetic splits lose the hyphen ("Ener-\\ngie" -> "Energie"); splits
    next to digits keep it ("CO2-\\nBilanz" -> "CO2-Bilanz") so compound
    tokens are not corrupted.
    """
    text = _HYPHEN_BREAK.sub("", text)
    return _HYPHEN_BREAK_KEEP.sub("-", text)


def preprocess(doc: Document, cfg: IngestConfig = IngestConfig()) -> Document:
    """Filter out non-content segment kinds, fix hyphenation, trim, re-index.

    Total and idempotent; never reorders surviving segments.
    """
    kept = []
    for seg in doc.segments:
        if seg.kind not in cfg.considered_kinds:
            continue
        text = dehyphenate(seg.text) if cfg.dehyphenate else seg.text
        text = text.strip()
        if len(text) < cfg.min_chars:
            continue
        kept.append((seg, text))
    segments = tuple(
        Segment(id=seg.id, kind=seg.kind, text=text, order=i, page=seg.page)
        for i, (seg, text) in enumerate(kept)
    )
    if not segments:
        raise SchemaError(f"document {doc.doc_id}: no segments survive preprocessing")
    return Document(doc.doc_id, segments, doc.source_format, doc.language)


def parse_normalized_json(data: bytes) -> Document:
    """Parse the normalized one-object-per-document JSON format.

    Segment order is re-indexed 0..N-1 in file order regardless of the
    ``order`` values present in the file.
    """
    try:
        obj = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise ParseError(f"not valid UTF-8: {e}", offset=e.start) from e
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON: {e.msg}", offset=e.pos) from e
    if not isinstance(obj, dict) or "doc_id" not in obj or "segments" not in obj:
        raise SchemaError("document object must have doc_id and segments")
    segments = []
    for i, s in enumerate(obj["segments"]):
        try:
            segments.append(Segment(
                id=str(s["id"]),
                kind=s.get("kind", "paragraph"),
                text=str(s["text"]),
                order=i,
                page=s.get("page"),
            ))
        except KeyError as e:
            raise SchemaError(f"segment {i}: missing field {e}") from e
    return Document(
        doc_id=str(obj["doc_id"]),
        segments=tuple(segments),
        source_format="json",
        language=obj.get("language", "de"),
    )


def parse_plain_text(data: bytes, doc_id: str) -> Document:
    """One paragraph segment per blank-line-separated block."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"not valid UTF-8: {e}", offset=e.start) from e
    blocks = [b.strip() for b in re.split(r"\n\s*\n", text) if b.strip()]
    if not blocks:
        raise SchemaError(f"document {doc_id}: no text blocks")
    segments = tuple(
        Segment(id=f"s{i}", kind="paragraph", text=b, order=i)
        for i, b in enumerate(blocks)
    )
    return Document(doc_id, segments, source_format="plain_text")


def _normalize_heading(text: str) -> str:
    return " ".join(text.split()).lower()


class _DnkHtmlParser(HTMLParser):
    """Flat walk over headings (h1-h4) and block elements (p, li, table)."""

    _BLOCK_KINDS = {"p": "paragraph", "li": "enumeration", "table": "table"}

    def __init__(self):
        super().__init__()
        self.sections = []  # (heading_text, [(kind, text), ...])
        self._capture = None  # ("heading"|kind, [chunks]) while inside a block
        self._table_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in ("h1", "h2", "h3", "h4"):
            self._capture = ("heading", [])
        elif tag == "table":
            self._table_depth += 1
            if self._table_depth == 1:
                self._capture = ("table", [])
        elif tag in ("p", "li") and self._table_depth == 0:
            self._capture = (self._BLOCK_KINDS[tag], [])

    def handle_endtag(self, tag):
        if tag == "table":
            self._table_depth = max(0, self._table_depth - 1)
            if self._table_depth:
                return
        if self._capture is None:
            return
        kind, chunks = self._capture
        if tag in ("h1", "h2", "h3", "h4") and kind == "heading":
            self.sections.append((" ".join("".join(chunks).split()), []))
            self._capture = None
        elif tag in ("p", "li", "table") and kind != "heading":
            text = " ".join("".join(chunks).split())
            if text and self.sections:
                self.sections[-1][1].append((kind, text))
            self._capture = None

    def handle_data(self, data):
        if self._capture is not None:
            self._capture[1].append(data)


@dataclass
class DnkParseReport:
    unknown_headings: list = field(default_factory=list)


def parse_dnk_html(data: bytes, catalog: RequirementCatalog,
                   heading_map: dict[str, str] | None = None,
                   doc_id: str = "dnk-report",
                   report: DnkParseReport | None = None) -> tuple[Document, AnnotationSet]:
    """Parse a DNK-style HTML report into a document plus ground-truth links.

    Every text block under a recognized requirement heading becomes one
    segment linked to that requirement, so 100% of emitted segments carry at
    least one annotation. Headings are matched after whitespace normalization
    against requirement titles, descriptions, or the optional override map;
    unrecognized headings are collected in ``report`` and their sections
    skipped.
    """
    try:
        html = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"not valid UTF-8: {e}", offset=e.start) from e

    lookup: dict[str, str] = {}
    for r in catalog:
        lookup[_normalize_heading(r.title)] = r.req_id
        if r.description:
            lookup[_normalize_heading(r.description)] = r.req_id
    for heading, req_id in (heading_map or {}).items():
        lookup[_normalize_heading(heading)] = req_id

    parser = _DnkHtmlParser()
    parser.feed(html)
    parser.close()

    segments, links = [], []
    for heading, blocks in parser.sections:
        req_id = lookup.get(_normalize_heading(heading))
        if req_id is None or req_id not in catalog:
            if report is not None:
                report.unknown_headings.append(heading)
            continue
        for kind, text in blocks:
            seg_id = f"s{len(segments)}"
            segments.append(Segment(id=seg_id, kind=kind, text=text, order=len(segments)))
            links.append((seg_id, req_id))
    if not segments:
        raise SchemaError(f"document {doc_id}: no recognized requirement sections")
    doc = Document(doc_id, tuple(segments), source_format="dnk_html")
    return doc, AnnotationSet(doc_id, links)
