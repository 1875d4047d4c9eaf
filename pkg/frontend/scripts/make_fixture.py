"""Build the e2e fixtures: a trained checkpoint, the catalog and one report.

Usage: python3 scripts/make_fixture.py OUT_DIR

Writes OUT_DIR/checkpoint.json, OUT_DIR/catalog.json and
OUT_DIR/report.json (a normalized report ready for upload).
"""
import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT / "tests"))

from repmatch.corpus import make_split
from repmatch.features import TextNormalizer, fit_tfidf
from repmatch.models import OptimizerConfig
from repmatch.pipeline import ScoringPipeline
from repmatch.trainer import TrainConfig, build_dataset, train_run
from synthdata import sparse_corpus


def main() -> None:
    out = pathlib.Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    catalog, docs = sparse_corpus(n_docs=30, segments_per_doc=10, seed=5)
    split = make_split([d.doc_id for d, _ in docs], (0.65, 0.15, 0.20), 42)
    norm = TextNormalizer(stemmer="none")
    by_id = {d.doc_id: (d, a) for d, a in docs}
    tfidf = fit_tfidf(
        [norm(s.text) for i in sorted(split.train) for s in by_id[i][0].segments],
        dim=128)

    def featurize(doc):
        return tfidf.transform_many(norm(s.text) for s in doc.segments)

    data = {
        name: build_dataset([by_id[i] for i in sorted(getattr(split, name))],
                            catalog, featurize)
        for name in ("train", "valid")
    }
    model, _ = train_run(data["train"], data["valid"], catalog, TrainConfig(
        hidden_dim=16, dropout_p=0.0, sampler_enabled=True, max_epochs=4,
        patience=2, optimizer=OptimizerConfig(peak_lr=1e-3, batch_size=32)))

    ScoringPipeline(norm, tfidf, model, catalog.fingerprint()).save(
        out / "checkpoint.json")
    (out / "catalog.json").write_text(json.dumps(catalog.to_json_obj()))
    (out / "report.json").write_text(json.dumps(docs[0][0].to_json_obj()))


if __name__ == "__main__":
    main()
