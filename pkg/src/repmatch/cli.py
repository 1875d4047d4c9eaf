"""Batch command-line interface.

Data goes to stdout, logs to stderr, so commands compose in shell
pipelines. Exit codes: 0 ok, 2 usage, 3 parse, 4 numeric, 5 io.

A corpus directory is the on-disk unit most commands operate on:

    corpus/
      catalog.json      requirement catalog (ordered array)
      docs/<id>.json    normalized documents
      anns/<id>.json    annotation sets, same stem as the document
      split.json        train/valid/test doc_id partition
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import trainer as trainer_mod
from .corpus import AnnotationSet, RequirementCatalog, make_split
from .errors import (InvalidInput, NumericalError, ParseError, RepmatchError,
                     SchemaError, StorageError)
from .features import fit_tfidf, normalizer_for_language
from .ingest import IngestConfig, parse_dnk_html, parse_normalized_json, parse_plain_text, preprocess
from .models import LogisticEnsemble, OptimizerConfig, train_logistic
from .pipeline import ScoringPipeline
from .ranking import rank
from .trainer import TrainConfig, build_dataset, evaluate_model, grid_search, train_run

EXIT_CODES = {"usage": 2, "parse": 3, "numeric": 4, "io": 5}


def _fail(exc: RepmatchError):
    click.echo(f"error [{exc.category}]: {exc}", err=True)
    sys.exit(EXIT_CODES.get(exc.category, 1))


def _load_catalog(path) -> RequirementCatalog:
    return RequirementCatalog.from_json_obj(
        json.loads(Path(path).read_text(encoding="utf-8")), name=Path(path).stem)


def _load_corpus(corpus_dir):
    """Returns (catalog, {doc_id: (Document, AnnotationSet)})."""
    corpus_dir = Path(corpus_dir)
    catalog = _load_catalog(corpus_dir / "catalog.json")
    docs = {}
    for doc_path in sorted((corpus_dir / "docs").glob("*.json")):
        doc = parse_normalized_json(doc_path.read_bytes())
        ann_path = corpus_dir / "anns" / doc_path.name
        if ann_path.exists():
            ann = AnnotationSet.from_json_obj(json.loads(ann_path.read_text()))
        else:
            ann = AnnotationSet(doc.doc_id, [])
        ann.validate(doc, catalog)
        docs[doc.doc_id] = (doc, ann)
    if not docs:
        raise InvalidInput(f"no documents under {corpus_dir}/docs")
    return catalog, docs


def _load_split(corpus_dir, docs, seed, ratios):
    split_path = Path(corpus_dir) / "split.json"
    if split_path.exists():
        obj = json.loads(split_path.read_text())
        from .corpus import DatasetSplit
        return DatasetSplit(frozenset(obj["train"]), frozenset(obj["valid"]),
                            frozenset(obj["test"]), obj["seed"])
    split = make_split(sorted(docs), ratios, seed)
    split_path.write_text(json.dumps(split.to_json_obj(), indent=2))
    click.echo(f"wrote new split to {split_path}", err=True)
    return split


def _datasets(catalog, docs, split, tfidf, normalizer):
    def featurize(doc):
        return tfidf.transform_many(normalizer(s.text) for s in doc.segments)

    out = {}
    for name in ("train", "valid", "test"):
        ids = sorted(getattr(split, name))
        out[name] = build_dataset([docs[i] for i in ids], catalog, featurize)
    return out


def _fit_features(docs, split, dim):
    first_doc = next(iter(docs.values()))[0]
    normalizer = normalizer_for_language(first_doc.language)
    train_tokens = [
        normalizer(s.text)
        for doc_id in sorted(split.train)
        for s in docs[doc_id][0].segments
    ]
    return normalizer, fit_tfidf(train_tokens, dim)


def _train_config(config_path, seed, sampler) -> TrainConfig:
    raw = {}
    if config_path:
        path = Path(config_path)
        if path.suffix == ".toml":
            import tomllib
            raw = tomllib.loads(path.read_text())
        else:
            raw = json.loads(path.read_text())
    opt = OptimizerConfig(
        peak_lr=raw.get("peak_lr", 1e-3),
        batch_size=raw.get("batch_size", 8),
        warmup_fraction=raw.get("warmup_fraction", 0.10),
        weight_decay=raw.get("weight_decay", 0.01),
        clip_norm=raw.get("clip_norm", 1.0),
    )
    return TrainConfig(
        max_epochs=raw.get("max_epochs", 15),
        patience=raw.get("patience", 3),
        seed=seed if seed is not None else raw.get("seed", 42),
        sampler_enabled=sampler if sampler is not None else raw.get("sampler_enabled", False),
        hidden_dim=raw.get("hidden_dim", 1024),
        dropout_p=raw.get("dropout_p", 0.3),
        optimizer=opt,
    )


@click.group()
def main():
    """Match report text segments to regulatory checklist requirements."""


@main.command()
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["json", "dnk-html", "text"]), default="json")
@click.option("--catalog", "catalog_path", type=click.Path(exists=True),
              help="required for dnk-html input")
@click.option("--out", "out_dir", type=click.Path(), required=True)
def ingest(files, fmt, catalog_path, out_dir):
    """Parse and preprocess raw report files into a corpus directory."""
    out = Path(out_dir)
    (out / "docs").mkdir(parents=True, exist_ok=True)
    (out / "anns").mkdir(exist_ok=True)
    try:
        catalog = _load_catalog(catalog_path) if catalog_path else None
        if fmt == "dnk-html" and catalog is None:
            raise InvalidInput("--catalog is required for dnk-html input")
        cfg = IngestConfig()
        for path in files:
            raw = Path(path).read_bytes()
            ann = None
            if fmt == "json":
                doc = preprocess(parse_normalized_json(raw), cfg)
            elif fmt == "dnk-html":
                doc, ann = parse_dnk_html(raw, catalog, doc_id=Path(path).stem)
            else:
                doc = preprocess(parse_plain_text(raw, Path(path).stem), cfg)
            (out / "docs" / f"{doc.doc_id}.json").write_text(
                json.dumps(doc.to_json_obj(), ensure_ascii=False), encoding="utf-8")
            if ann is not None:
                (out / "anns" / f"{doc.doc_id}.json").write_text(
                    json.dumps(ann.to_json_obj()))
            click.echo(f"ingested {path} -> {doc.doc_id} ({len(doc)} segments)", err=True)
    except RepmatchError as e:
        _fail(e)


@main.command("fit-tfidf")
@click.option("--corpus-dir", type=click.Path(exists=True), required=True)
@click.option("--dim", default=8000, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--ratios", default="0.65,0.15,0.20", show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def fit_tfidf_cmd(corpus_dir, dim, seed, ratios, out_path):
    """Fit a tf-idf vectorizer on the training split of a corpus."""
    try:
        catalog, docs = _load_corpus(corpus_dir)
        split = _load_split(corpus_dir, docs, seed, tuple(map(float, ratios.split(","))))
        _, tfidf = _fit_features(docs, split, dim)
        Path(out_path).write_text(json.dumps(tfidf.to_json_obj()))
        click.echo(f"fitted tf-idf: {len(tfidf.vocab)} terms, dim {dim}", err=True)
    except RepmatchError as e:
        _fail(e)


@main.command()
@click.option("--corpus-dir", type=click.Path(exists=True), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--model", "model_kind", type=click.Choice(["mlp", "logistic"]), default="mlp")
@click.option("--seed", type=int, default=None)
@click.option("--sampler/--no-sampler", "sampler", default=None)
@click.option("--dim", default=8000, show_default=True)
@click.option("--ratios", default="0.65,0.15,0.20", show_default=True)
@click.option("--out", "ckpt_path", type=click.Path(), required=True)
@click.option("--run-record", "record_path", type=click.Path())
def train(corpus_dir, config_path, model_kind, seed, sampler, dim, ratios,
          ckpt_path, record_path):
    """Train a classifier and write the best checkpoint."""
    try:
        cfg = _train_config(config_path, seed, sampler)
        catalog, docs = _load_corpus(corpus_dir)
        split = _load_split(corpus_dir, docs, cfg.seed, tuple(map(float, ratios.split(","))))
        normalizer, tfidf = _fit_features(docs, split, dim)
        data = _datasets(catalog, docs, split, tfidf, normalizer)
        if model_kind == "mlp":
            model, record = train_run(data["train"], data["valid"], catalog, cfg)
            if record_path:
                with open(record_path, "a", encoding="utf-8") as f:
                    f.write(json.dumps(record.to_json_obj(), sort_keys=True) + "\n")
        else:
            model = train_logistic(
                LogisticEnsemble(data["train"].X.shape[1], len(catalog)),
                data["train"].X, data["train"].Y)
        pipe = ScoringPipeline(normalizer, tfidf, model, catalog.fingerprint())
        pipe.save(ckpt_path)
        click.echo(f"checkpoint written to {ckpt_path}", err=True)
    except RepmatchError as e:
        _fail(e)


@main.command()
@click.option("--corpus-dir", type=click.Path(exists=True), required=True)
@click.option("--grid", "grid_path", type=click.Path(exists=True), required=True,
              help="JSON object: hyperparameter name -> list of values")
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--seed", type=int, default=None)
@click.option("--sampler/--no-sampler", "sampler", default=None)
@click.option("--dim", default=8000, show_default=True)
@click.option("--ratios", default="0.65,0.15,0.20", show_default=True)
@click.option("--out", "ckpt_path", type=click.Path(), required=True)
@click.option("--run-record", "record_path", type=click.Path())
def gridsearch(corpus_dir, grid_path, config_path, seed, sampler, dim, ratios,
               ckpt_path, record_path):
    """Exhaustive hyperparameter search; keeps the best checkpoint."""
    try:
        base = _train_config(config_path, seed, sampler)
        grid = json.loads(Path(grid_path).read_text())
        catalog, docs = _load_corpus(corpus_dir)
        split = _load_split(corpus_dir, docs, base.seed, tuple(map(float, ratios.split(","))))
        normalizer, tfidf = _fit_features(docs, split, dim)
        data = _datasets(catalog, docs, split, tfidf, normalizer)
        ranked, failures = grid_search(grid, data["train"], data["valid"], catalog, base)
        if record_path:
            with open(record_path, "a", encoding="utf-8") as f:
                for _, record in ranked:
                    f.write(json.dumps(record.to_json_obj(), sort_keys=True) + "\n")
                for record in failures:
                    f.write(json.dumps(record.to_json_obj(), sort_keys=True) + "\n")
        best_model, best_record = ranked[0]
        pipe = ScoringPipeline(normalizer, tfidf, best_model, catalog.fingerprint())
        pipe.save(ckpt_path)
        click.echo(f"{len(ranked)} runs ok, {len(failures)} failed; "
                   f"best val MAP(3) {max(best_record.val_map3):.4f}", err=True)
    except RepmatchError as e:
        _fail(e)


@main.command()
@click.option("--checkpoint", type=click.Path(exists=True), required=True)
@click.option("--corpus-dir", type=click.Path(exists=True), required=True)
@click.option("--split", "split_name", type=click.Choice(["train", "valid", "test"]),
              default="test", show_default=True)
@click.option("--ks", default="3,5", show_default=True)
@click.option("--out", "out_path", type=click.Path())
@click.option("--label", default="model", show_default=True)
def evaluate(checkpoint, corpus_dir, split_name, ks, out_path, label):
    """Score a held-out split and print the MS/MAP table."""
    try:
        pipe = ScoringPipeline.load(checkpoint)
        catalog, docs = _load_corpus(corpus_dir)
        pipe.check_catalog(catalog)
        split_path = Path(corpus_dir) / "split.json"
        if not split_path.exists():
            raise InvalidInput(f"{split_path} not found; run train or fit-tfidf first")
        split = _load_split(corpus_dir, docs, 0, (0.65, 0.15, 0.20))
        ids = sorted(getattr(split, split_name))
        dataset = trainer_mod.build_dataset(
            [docs[i] for i in ids], catalog, pipe.featurize)
        k_list = tuple(int(k) for k in ks.split(","))
        report = evaluate_model(pipe.model, dataset, catalog, ks=k_list)
        if out_path:
            Path(out_path).write_text(report.to_json())
        sys.stdout.write(report.to_table(label))
    except RepmatchError as e:
        _fail(e)


@main.command()
@click.option("--checkpoint", type=click.Path(exists=True), required=True)
@click.option("--catalog", "catalog_path", type=click.Path(exists=True), required=True)
@click.option("--doc", "doc_path", type=click.Path(exists=True), required=True)
@click.option("--req", "req_id", required=True)
@click.option("--k", default=3, show_default=True)
def recommend(checkpoint, catalog_path, doc_path, req_id, k):
    """Print the top-K recommended segments for one requirement as JSON."""
    try:
        pipe = ScoringPipeline.load(checkpoint)
        catalog = _load_catalog(catalog_path)
        pipe.check_catalog(catalog)
        doc = preprocess(parse_normalized_json(Path(doc_path).read_bytes()))
        scores = pipe.score(doc)
        result = rank(scores, doc, catalog, catalog.index_of(req_id), k)
        sys.stdout.write(json.dumps(result.to_json_obj(), indent=2) + "\n")
    except RepmatchError as e:
        _fail(e)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--data-dir", type=click.Path(), default="./repmatch-data", show_default=True)
@click.option("--checkpoint", type=click.Path(exists=True), required=True)
@click.option("--catalog", "catalog_path", type=click.Path(exists=True), required=True)
def serve(host, port, data_dir, checkpoint, catalog_path):
    """Run the review service (see repmatch.service)."""
    import uvicorn

    from .service import ServiceSettings, create_app
    try:
        app = create_app(ServiceSettings(
            data_dir=Path(data_dir),
            checkpoint_path=Path(checkpoint),
            catalog_path=Path(catalog_path),
        ))
    except RepmatchError as e:
        _fail(e)
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command("export-embeddings-template")
@click.option("--corpus-dir", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def export_embeddings_template(corpus_dir, out_path):
    """List every segment an external encoder must embed.

    Writes newline-delimited JSON {doc_id, segment_id, text}; the encoder's
    output goes into an EMB1 file (magic "EMB1", dim u32 LE, count u64 LE,
    then id_len u16 LE + id + dim float32 LE per record).
    """
    try:
        _, docs = _load_corpus(corpus_dir)
        with open(out_path, "w", encoding="utf-8") as f:
            for doc_id in sorted(docs):
                doc, _ = docs[doc_id]
                for s in doc.segments:
                    f.write(json.dumps({"doc_id": doc_id, "segment_id": s.id,
                                        "text": s.text}, ensure_ascii=False) + "\n")
        click.echo(f"template written to {out_path}", err=True)
    except RepmatchError as e:
        _fail(e)


if __name__ == "__main__":
    main()
