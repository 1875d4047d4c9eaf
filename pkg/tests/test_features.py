import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repmatch.corpus import Segment
from repmatch.errors import InvalidInput, StorageError
from repmatch.features import (EmbeddingProvider, TextNormalizer, fit_tfidf,
                               normalizer_for_language, write_embedding_file)


class TestNormalize:
    def test_all_transforms(self):
        norm = TextNormalizer(stemmer="none")
        assert norm("CO2 Emissionen stiegen 2021!") == ["co", "emissionen", "stiegen"]

    def test_empty(self):
        assert TextNormalizer()("") == []

    def test_lowercase_only(self):
        norm = TextNormalizer(strip_punct=False, strip_digits=False, stemmer="none")
        assert norm("Energie") == ["energie"]

    def test_german_default_for_de(self):
        assert normalizer_for_language("de-DE").stemmer == "german_snowball"
        assert normalizer_for_language("en").stemmer == "none"

    def test_stemmer_collapses_inflections(self):
        norm = TextNormalizer(stemmer="german_snowball")
        assert norm("Emissionen")[0] == norm("Emission")[0]

    @settings(max_examples=300, deadline=None)
    @given(st.text(max_size=80),
           st.sampled_from(["none", "german_snowball", "identity-suffix-stripper"]))
    def test_deterministic(self, text, stemmer):
        norm = TextNormalizer(stemmer=stemmer)
        assert norm(text) == norm(text)


class TestFitTfidf:
    def test_smoothed_idf_values(self):
        model = fit_tfidf([["a", "b"], ["a"]], dim=8000)
        assert model.idf[model.vocab["a"]] == pytest.approx(1.0, abs=1e-12)
        assert model.idf[model.vocab["b"]] == pytest.approx(math.log(3 / 2) + 1, abs=1e-12)

    def test_dim_caps_vocab_by_frequency(self):
        model = fit_tfidf([["a", "b"], ["a"]], dim=1)
        assert set(model.vocab) == {"a"}

    def test_identical_documents_equal_idf(self):
        model = fit_tfidf([["x", "y"]] * 4, dim=10)
        assert np.allclose(model.idf, 1.0)

    def test_lexicographic_tie_break(self):
        model = fit_tfidf([["b", "a", "c"]], dim=2)
        assert set(model.vocab) == {"a", "b"}

    def test_empty_corpus(self):
        with pytest.raises(InvalidInput):
            fit_tfidf([], dim=10)

    def test_vocab_never_exceeds_dim(self):
        corpus = [[f"t{i}" for i in range(20)]]
        assert len(fit_tfidf(corpus, dim=5).vocab) == 5
        assert len(fit_tfidf(corpus, dim=50).vocab) == 20


class TestTransformTfidf:
    def test_oov_gives_zero_vector(self):
        model = fit_tfidf([["a"]], dim=4)
        assert not model.transform(["zz", "qq"]).any()

    def test_single_term_unit_vector(self):
        model = fit_tfidf([["a"], ["a"]], dim=4)
        vec = model.transform(["a"])
        assert vec[model.vocab["a"]] == pytest.approx(1.0, abs=1e-12)

    def test_direction_matches_hand_computation(self):
        model = fit_tfidf([["a", "b"], ["a"]], dim=4)
        vec = model.transform(["a", "a", "b"])
        raw = np.zeros(4)
        raw[model.vocab["a"]] = 2 * model.idf[model.vocab["a"]]
        raw[model.vocab["b"]] = 1 * model.idf[model.vocab["b"]]
        assert np.allclose(vec, raw / np.linalg.norm(raw), atol=1e-12)

    @settings(max_examples=300, deadline=None)
    @given(st.lists(st.sampled_from(["a", "b", "c", "zz"]), max_size=12))
    def test_norm_is_zero_or_one(self, tokens):
        model = fit_tfidf([["a", "b"], ["b", "c"]], dim=8)
        norm = np.linalg.norm(model.transform(tokens))
        assert norm == 0.0 or abs(norm - 1.0) < 1e-9

    def test_json_round_trip(self):
        import json

        from repmatch.features import TfidfModel
        model = fit_tfidf([["a", "b"], ["a"]], dim=4)
        clone = TfidfModel.from_json_obj(json.loads(json.dumps(model.to_json_obj())))
        assert np.array_equal(clone.transform(["a", "b"]), model.transform(["a", "b"]))


class TestEmbeddingProvider:
    def seg(self, seg_id="s1", text="hello world"):
        return Segment(seg_id, "paragraph", text, 0)

    def test_stored_vector_verbatim(self, tmp_path):
        path = tmp_path / "e.emb"
        stored = np.arange(4, dtype=np.float32)
        write_embedding_file(path, 4, {"s1": stored})
        provider = EmbeddingProvider.load(path)
        assert np.array_equal(provider(self.seg()), stored.astype(np.float64))

    def test_fallback_deterministic(self):
        provider = EmbeddingProvider(dim=16)
        seg = self.seg("absent", "Nachhaltigkeit im Bericht")
        assert np.array_equal(provider(seg), provider(seg))
        assert provider(seg).any()

    def test_output_dim_768(self):
        provider = EmbeddingProvider(dim=768)
        assert provider(self.seg()).shape == (768,)

    def test_corrupt_file_fails_at_load(self, tmp_path):
        path = tmp_path / "bad.emb"
        path.write_bytes(b"EMB1" + b"\x00" * 5)
        with pytest.raises(StorageError):
            EmbeddingProvider.load(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.emb"
        path.write_bytes(b"NOPE" + b"\x00" * 20)
        with pytest.raises(StorageError, match="magic"):
            EmbeddingProvider.load(path)

    def test_trailing_garbage_rejected(self, tmp_path):
        path = tmp_path / "e.emb"
        write_embedding_file(path, 2, {"s1": np.zeros(2, dtype=np.float32)})
        path.write_bytes(path.read_bytes() + b"xx")
        with pytest.raises(StorageError, match="trailing"):
            EmbeddingProvider.load(path)

    def test_round_trip_many(self, tmp_path):
        path = tmp_path / "e.emb"
        rng = np.random.default_rng(3)
        vectors = {f"id{i}": rng.normal(size=8).astype(np.float32) for i in range(10)}
        write_embedding_file(path, 8, vectors)
        provider = EmbeddingProvider.load(path)
        assert provider.dim == 8
        for seg_id, vec in vectors.items():
            got = provider(Segment(seg_id, "paragraph", "x", 0))
            assert np.array_equal(got, vec.astype(np.float64))
