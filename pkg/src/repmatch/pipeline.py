"""End-to-end scoring pipeline and checkpoint persistence.

A pipeline bundles the text normalizer, the feature stage (tf-idf model or
embedding provider) and the classifier, pinned to a catalog fingerprint.
Checkpoints are JSON so they stay self-describing and diffable; float
round-tripping through json is exact, which the determinism guarantees
rely on.
"""
from __future__ import annotations

import json

import numpy as np

from .corpus import Document, RequirementCatalog
from .errors import InvalidInput, StorageError
from .features import EmbeddingProvider, TextNormalizer, TfidfModel
from .models import LogisticEnsemble, MlpClassifier
from .ranking import ScoreMatrix

CHECKPOINT_VERSION = 1


class ScoringPipeline:
    def __init__(self, normalizer: TextNormalizer, features, model, catalog_fingerprint: str):
        if not isinstance(features, (TfidfModel, EmbeddingProvider)):
            raise InvalidInput("features must be a TfidfModel or EmbeddingProvider")
        self.normalizer = normalizer
        self.features = features
        self.model = model
        self.catalog_fingerprint = catalog_fingerprint

    def featurize(self, doc: Document) -> np.ndarray:
        if isinstance(self.features, TfidfModel):
            return self.features.transform_many(
                self.normalizer(s.text) for s in doc.segments)
        return np.stack([self.features(s) for s in doc.segments])

    def score(self, doc: Document) -> ScoreMatrix:
        probs = self.model.forward(self.featurize(doc))
        return ScoreMatrix(doc.doc_id, np.atleast_2d(probs))

    def check_catalog(self, catalog: RequirementCatalog) -> None:
        if catalog.fingerprint() != self.catalog_fingerprint:
            raise InvalidInput(
                f"checkpoint was trained against catalog {self.catalog_fingerprint}, "
                f"got {catalog.fingerprint()}")

    def save(self, path) -> None:
        if isinstance(self.features, TfidfModel):
            features_obj = {"type": "tfidf", "model": self.features.to_json_obj()}
        else:
            raise InvalidInput("embedding-backed pipelines are referenced by file, not saved")
        model_type = "mlp" if isinstance(self.model, MlpClassifier) else "logistic"
        obj = {
            "version": CHECKPOINT_VERSION,
            "catalog_fingerprint": self.catalog_fingerprint,
            "normalizer": self.normalizer.to_json_obj(),
            "features": features_obj,
            "model": {"type": model_type, "data": self.model.to_json_obj()},
        }
        with open(path, "w", encoding="utf-8") as f:
            json.dump(obj, f, sort_keys=True)

    @classmethod
    def load(cls, path) -> "ScoringPipeline":
        try:
            with open(path, encoding="utf-8") as f:
                obj = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise StorageError(f"cannot load checkpoint: {e}") from e
        if obj.get("version") != CHECKPOINT_VERSION:
            raise StorageError(f"unsupported checkpoint version {obj.get('version')!r}")
        normalizer = TextNormalizer.from_json_obj(obj["normalizer"])
        if obj["features"]["type"] != "tfidf":
            raise StorageError(f"unknown feature stage {obj['features']['type']!r}")
        features = TfidfModel.from_json_obj(obj["features"]["model"])
        model_obj = obj["model"]
        if model_obj["type"] == "mlp":
            model = MlpClassifier.from_json_obj(model_obj["data"])
        elif model_obj["type"] == "logistic":
            model = LogisticEnsemble.from_json_obj(model_obj["data"])
        else:
            raise StorageError(f"unknown model type {model_obj['type']!r}")
        return cls(normalizer, features, model, obj["catalog_fingerprint"])
