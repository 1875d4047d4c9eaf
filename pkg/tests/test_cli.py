import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from repmatch.cli import main
from synthdata import sparse_corpus

TRAIN_CFG = {"hidden_dim": 16, "dropout_p": 0.0, "peak_lr": 1e-3,
             "batch_size": 32, "max_epochs": 3, "patience": 2,
             "sampler_enabled": True}


def write_corpus(root: Path, n_docs=24):
    catalog, docs = sparse_corpus(n_docs=n_docs, segments_per_doc=10, seed=5)
    (root / "docs").mkdir(parents=True)
    (root / "anns").mkdir()
    (root / "catalog.json").write_text(json.dumps(catalog.to_json_obj()))
    for doc, ann in docs:
        (root / "docs" / f"{doc.doc_id}.json").write_text(
            json.dumps(doc.to_json_obj()))
        (root / "anns" / f"{doc.doc_id}.json").write_text(
            json.dumps(ann.to_json_obj()))
    return catalog, docs


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    corpus = root / "corpus"
    catalog, docs = write_corpus(corpus)
    cfg = root / "train.json"
    cfg.write_text(json.dumps(TRAIN_CFG))
    ckpt = root / "ckpt.json"
    runner = CliRunner()
    result = runner.invoke(main, [
        "train", "--corpus-dir", str(corpus), "--config", str(cfg),
        "--dim", "128", "--out", str(ckpt),
        "--run-record", str(root / "runs.jsonl")])
    assert result.exit_code == 0, result.output
    return root, corpus, ckpt, catalog, docs


class TestTrain:
    def test_checkpoint_written(self, workspace):
        root, corpus, ckpt, *_ = workspace
        obj = json.loads(ckpt.read_text())
        assert obj["version"] == 1
        assert obj["model"]["type"] == "mlp"

    def test_run_record_emitted(self, workspace):
        root, *_ = workspace
        lines = (root / "runs.jsonl").read_text().splitlines()
        assert len(lines) == 1
        record = json.loads(lines[0])
        assert record["config"]["seed"] == 42
        assert len(record["val_map3"]) >= 1


class TestEvaluate:
    def test_table_shape_and_report(self, workspace):
        root, corpus, ckpt, *_ = workspace
        out = root / "report.json"
        result = CliRunner().invoke(main, [
            "evaluate", "--checkpoint", str(ckpt), "--corpus-dir", str(corpus),
            "--ks", "3,5", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "MS(3)" in result.output and "MAP(5)" in result.output
        report = json.loads(out.read_text())
        assert set(report["per_k"]) == {"3", "5"}

    def test_deterministic_reports(self, workspace):
        root, corpus, ckpt, *_ = workspace
        outs = []
        for name in ("a.json", "b.json"):
            out = root / name
            result = CliRunner().invoke(main, [
                "evaluate", "--checkpoint", str(ckpt), "--corpus-dir", str(corpus),
                "--out", str(out)])
            assert result.exit_code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_catalog_fingerprint_mismatch_aborts(self, workspace, tmp_path):
        root, corpus, ckpt, *_ = workspace
        other = tmp_path / "other"
        write_corpus(other, n_docs=6)
        cat = json.loads((other / "catalog.json").read_text())
        cat.append({"req_id": "EXTRA-1", "category": "social", "title": "Extra"})
        (other / "catalog.json").write_text(json.dumps(cat))
        result = CliRunner().invoke(main, [
            "evaluate", "--checkpoint", str(ckpt), "--corpus-dir", str(other)])
        assert result.exit_code == 2
        assert "catalog" in result.output


class TestRecommend:
    def test_k3_valid_against_schema(self, workspace):
        import jsonschema
        root, corpus, ckpt, catalog, docs = workspace
        doc_file = next((corpus / "docs").glob("*.json"))
        result = CliRunner().invoke(main, [
            "recommend", "--checkpoint", str(ckpt),
            "--catalog", str(corpus / "catalog.json"),
            "--doc", str(doc_file), "--req", catalog.requirements[0].req_id,
            "--k", "3"])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        schema = json.loads(Path("docs/schemas/recommendation_list.schema.json").read_text())
        jsonschema.validate(payload, schema)
        assert len(payload["items"]) == 3

    def test_unknown_requirement_nonzero_exit(self, workspace):
        root, corpus, ckpt, catalog, docs = workspace
        doc_file = next((corpus / "docs").glob("*.json"))
        result = CliRunner().invoke(main, [
            "recommend", "--checkpoint", str(ckpt),
            "--catalog", str(corpus / "catalog.json"),
            "--doc", str(doc_file), "--req", "NOPE-1"])
        assert result.exit_code == 2
        assert "not in catalog" in result.output


class TestIngest:
    def test_json_ingest_roundtrip(self, workspace, tmp_path):
        root, corpus, *_ = workspace
        src = next((corpus / "docs").glob("*.json"))
        out = tmp_path / "out"
        result = CliRunner().invoke(main, [
            "ingest", str(src), "--format", "json", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert any((out / "docs").glob("*.json"))

    def test_parse_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        result = CliRunner().invoke(main, [
            "ingest", str(bad), "--format", "json", "--out", str(tmp_path / "o")])
        assert result.exit_code == 3

    def test_text_ingest(self, tmp_path):
        src = tmp_path / "report.txt"
        src.write_text("Erster Absatz\n\nZweiter Absatz\n")
        out = tmp_path / "out"
        result = CliRunner().invoke(main, [
            "ingest", str(src), "--format", "text", "--out", str(out)])
        assert result.exit_code == 0
        doc = json.loads((out / "docs" / "report.json").read_text())
        assert len(doc["segments"]) == 2


class TestGridsearch:
    def test_best_checkpoint_saved(self, workspace, tmp_path):
        root, corpus, *_ = workspace
        grid = tmp_path / "grid.json"
        grid.write_text(json.dumps({"hidden_dim": [8, 16]}))
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({**TRAIN_CFG, "max_epochs": 2, "patience": 1}))
        ckpt = tmp_path / "best.json"
        result = CliRunner().invoke(main, [
            "gridsearch", "--corpus-dir", str(corpus), "--grid", str(grid),
            "--config", str(cfg), "--dim", "128", "--out", str(ckpt),
            "--run-record", str(tmp_path / "runs.jsonl")])
        assert result.exit_code == 0, result.output
        assert ckpt.exists()
        assert len((tmp_path / "runs.jsonl").read_text().splitlines()) == 2


class TestEmbeddingsTemplate:
    def test_lists_every_segment(self, workspace, tmp_path):
        root, corpus, ckpt, catalog, docs = workspace
        out = tmp_path / "template.ndjson"
        result = CliRunner().invoke(main, [
            "export-embeddings-template", "--corpus-dir", str(corpus),
            "--out", str(out)])
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert len(lines) == sum(len(d) for d, _ in docs)
        first = json.loads(lines[0])
        assert set(first) == {"doc_id", "segment_id", "text"}
