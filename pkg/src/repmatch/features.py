"""Segment text to fixed-length vectors.

Two feature families: a trainable Tf-Idf vectorizer (sparse bag-of-words)
and a file-backed dense embedding provider that stands in for an external
transformer encoder. Both are immutable once fitted/loaded.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
import struct
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import Segment
from .errors import InvalidInput, StorageError
from .stemming import stem_german, strip_common_suffixes

_PUNCT = re.compile(r"[^\w\s]|_", re.UNICODE)
_DIGIT = re.compile(r"\d")

STEMMERS = {
    "none": lambda w: w,
    "german_snowball": stem_german,
    "identity-suffix-stripper": strip_common_suffixes,
}


@dataclass(frozen=True)
class TextNormalizer:
    lowercase: bool = True
    strip_punct: bool = True
    strip_digits: bool = True
    stemmer: str = "none"

    def __post_init__(self):
        if self.stemmer not in STEMMERS:
            raise InvalidInput(f"unknown stemmer {self.stemmer!r}")

    def __call__(self, text: str) -> list[str]:
        if self.lowercase:
            text = text.lower()
        if self.strip_punct:
            text = _PUNCT.sub(" ", text)
        if self.strip_digits:
            text = _DIGIT.sub("", text)
        stem = STEMMERS[self.stemmer]
        return [stem(t) for t in text.split()]

    def to_json_obj(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "strip_punct": self.strip_punct,
            "strip_digits": self.strip_digits,
            "stemmer": self.stemmer,
        }

    @classmethod
    def from_json_obj(cls, obj) -> "TextNormalizer":
        return cls(**obj)


def normalizer_for_language(language: str) -> TextNormalizer:
    stemmer = "german_snowball" if language.split("-")[0] == "de" else "none"
    return TextNormalizer(stemmer=stemmer)


class TfidfModel:
    """Fitted Tf-Idf vectorizer with a frequency-capped vocabulary."""

    def __init__(self, vocab: dict[str, int], idf: np.ndarray, dim: int, doc_count: int):
        self.vocab = vocab
        self.idf = np.asarray(idf, dtype=np.float64)
        self.dim = dim
        self.doc_count = doc_count

    def transform(self, tokens: list[str]) -> np.ndarray:
        """Raw-count tf times idf, L2-normalized. All-OOV input stays zero."""
        vec = np.zeros(self.dim, dtype=np.float64)
        for term, tf in Counter(tokens).items():
            j = self.vocab.get(term)
            if j is not None:
                vec[j] = tf * self.idf[j]
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return vec

    def transform_many(self, token_lists) -> np.ndarray:
        return np.stack([self.transform(t) for t in token_lists])

    def to_json_obj(self) -> dict:
        terms = sorted(self.vocab, key=self.vocab.get)
        return {
            "dim": self.dim,
            "doc_count": self.doc_count,
            "terms": terms,
            "idf": list(self.idf),
        }

    @classmethod
    def from_json_obj(cls, obj) -> "TfidfModel":
        vocab = {t: j for j, t in enumerate(obj["terms"])}
        return cls(vocab, np.array(obj["idf"]), obj["dim"], obj["doc_count"])


def fit_tfidf(corpus: list[list[str]], dim: int = 8000) -> TfidfModel:
    """Fit on tokenized segments.

    Vocabulary keeps the top-``dim`` terms by collection frequency (total
    occurrences), ties broken lexicographically; idf is the smoothed variant
    ln((1+D)/(1+df)) + 1.
    """
    if not corpus:
        raise InvalidInput("cannot fit tf-idf on an empty corpus")
    cf = Counter()
    df = Counter()
    for tokens in corpus:
        cf.update(tokens)
        df.update(set(tokens))
    terms = sorted(cf, key=lambda t: (-cf[t], t))[:dim]
    vocab = {t: j for j, t in enumerate(terms)}
    d = len(corpus)
    idf = np.array([math.log((1 + d) / (1 + df[t])) + 1.0 for t in terms])
    return TfidfModel(vocab, idf, dim, d)


_EMB_MAGIC = b"EMB1"


def write_embedding_file(path, dim: int, vectors: dict[str, np.ndarray]) -> None:
    """Binary layout: magic "EMB1", dim u32 LE, count u64 LE, then per record
    id_len u16 LE, id bytes UTF-8, dim float32 LE values."""
    with open(path, "wb") as f:
        f.write(_EMB_MAGIC)
        f.write(struct.pack("<IQ", dim, len(vectors)))
        for seg_id, vec in vectors.items():
            vec = np.asarray(vec, dtype="<f4")
            if vec.shape != (dim,):
                raise InvalidInput(f"vector for {seg_id!r} has shape {vec.shape}, want ({dim},)")
            id_bytes = seg_id.encode("utf-8")
            f.write(struct.pack("<H", len(id_bytes)))
            f.write(id_bytes)
            f.write(vec.tobytes())


class EmbeddingProvider:
    """Dense per-segment vectors from an embedding file, with a deterministic
    feature-hashing fallback for segments the file does not cover.

    All load-time validation happens in the constructor; lookups never fail.
    """

    def __init__(self, dim: int, vectors: dict[str, np.ndarray] | None = None,
                 normalizer: TextNormalizer | None = None):
        self.dim = dim
        self.vectors = vectors or {}
        self.normalizer = normalizer or TextNormalizer()

    @classmethod
    def load(cls, path, normalizer: TextNormalizer | None = None) -> "EmbeddingProvider":
        try:
            with open(path, "rb") as f:
                data = f.read()
        except OSError as e:
            raise StorageError(f"cannot read embedding file: {e}") from e
        if data[:4] != _EMB_MAGIC:
            raise StorageError("bad magic: not an EMB1 embedding file")
        try:
            dim, count = struct.unpack_from("<IQ", data, 4)
            pos = 16
            vectors = {}
            for _ in range(count):
                (id_len,) = struct.unpack_from("<H", data, pos)
                pos += 2
                seg_id = data[pos:pos + id_len].decode("utf-8")
                pos += id_len
                vec = np.frombuffer(data, dtype="<f4", count=dim, offset=pos)
                if vec.size != dim:
                    raise StorageError(f"truncated vector for {seg_id!r}")
                pos += 4 * dim
                vectors[seg_id] = vec.astype(np.float64)
            if pos != len(data):
                raise StorageError(f"{len(data) - pos} trailing bytes after last record")
        except (struct.error, UnicodeDecodeError) as e:
            raise StorageError(f"corrupt embedding file: {e}") from e
        return cls(dim, vectors, normalizer)

    def __call__(self, seg: Segment) -> np.ndarray:
        stored = self.vectors.get(seg.id)
        if stored is not None:
            return stored
        return self._hash_fallback(seg.text)

    def _hash_fallback(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in self.normalizer(text):
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
            value = int.from_bytes(digest, "little")
            sign = 1.0 if value & 1 else -1.0
            vec[(value >> 1) % self.dim] += sign
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return vec
