import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repmatch.corpus import (AnnotationSet, Document, Requirement,
                             RequirementCatalog, Segment, label_vector,
                             make_split)
from repmatch.errors import InvalidInput, NotFound, SchemaError


def doc_with(n):
    segs = tuple(Segment(id=f"s{i}", kind="paragraph", text=f"t{i}", order=i)
                 for i in range(n))
    return Document("d1", segs)


def catalog_of(m):
    return RequirementCatalog(
        [Requirement(f"r{j+1}", "economy", f"req {j+1}") for j in range(m)])


class TestDomainTypes:
    def test_duplicate_segment_id_rejected(self):
        segs = (Segment("s1", "paragraph", "a", 0), Segment("s1", "paragraph", "b", 1))
        with pytest.raises(SchemaError, match="duplicate"):
            Document("d", segs)

    def test_non_contiguous_order_rejected(self):
        segs = (Segment("s1", "paragraph", "a", 0), Segment("s2", "paragraph", "b", 2))
        with pytest.raises(SchemaError, match="order"):
            Document("d", segs)

    def test_annotation_validation(self):
        doc = doc_with(2)
        cat = catalog_of(2)
        AnnotationSet("d1", [("s0", "r1")]).validate(doc, cat)
        with pytest.raises(SchemaError):
            AnnotationSet("d1", [("nope", "r1")]).validate(doc, cat)
        with pytest.raises(SchemaError):
            AnnotationSet("d1", [("s0", "nope")]).validate(doc, cat)


class TestLabelVector:
    def test_no_links_gives_zero_vector(self):
        doc = doc_with(3)
        y = label_vector(doc, "s0", AnnotationSet("d1", []), catalog_of(4))
        assert y.shape == (4,) and not y.any()

    def test_catalog_of_89_requirements(self):
        doc = doc_with(1)
        y = label_vector(doc, "s0", AnnotationSet("d1", []), catalog_of(89))
        assert len(y) == 89

    def test_column_order_follows_catalog(self):
        doc = doc_with(2)
        ann = AnnotationSet("d1", [("s1", "r3"), ("s1", "r6")])
        y = label_vector(doc, "s1", ann, catalog_of(6))
        assert y.tolist() == [0, 0, 1, 0, 0, 1]

    def test_unknown_segment(self):
        with pytest.raises(NotFound):
            label_vector(doc_with(1), "sX", AnnotationSet("d1", []), catalog_of(1))

    def test_round_trip_links(self):
        doc = doc_with(5)
        cat = catalog_of(4)
        ann = AnnotationSet("d1", [("s0", "r1"), ("s0", "r4"), ("s3", "r2")])
        rebuilt = set()
        for seg in doc.segments:
            y = label_vector(doc, seg.id, ann, cat)
            for j in np.flatnonzero(y):
                rebuilt.add((seg.id, cat.requirements[j].req_id))
        assert rebuilt == set(ann.links)


class TestMakeSplit:
    def test_paper_ratios(self):
        ids = [f"d{i}" for i in range(100)]
        split = make_split(ids, (0.65, 0.15, 0.20), 42)
        assert (len(split.train), len(split.valid), len(split.test)) == (65, 15, 20)

    def test_minimal_split(self):
        split = make_split(["a", "b", "c"], (1 / 3, 1 / 3, 1 / 3), 0)
        assert (len(split.train), len(split.valid), len(split.test)) == (1, 1, 1)

    def test_deterministic(self):
        ids = [f"d{i}" for i in range(37)]
        assert make_split(ids, (0.7, 0.15, 0.15), 5) == make_split(ids, (0.7, 0.15, 0.15), 5)

    def test_too_few_documents(self):
        with pytest.raises(InvalidInput):
            make_split(["a", "b"], (0.6, 0.2, 0.2), 0)

    def test_bad_ratios(self):
        with pytest.raises(InvalidInput):
            make_split(["a", "b", "c"], (0.5, 0.2, 0.2), 0)

    @settings(max_examples=1000, deadline=None)
    @given(n=st.integers(3, 60), seed=st.integers(0, 2**31),
           cut=st.tuples(st.floats(0.05, 0.45), st.floats(0.05, 0.45)))
    def test_partition_property(self, n, seed, cut):
        ids = [f"d{i}" for i in range(n)]
        r_valid, r_test = cut
        split = make_split(ids, (1.0 - r_valid - r_test, r_valid, r_test), seed)
        assert split.train | split.valid | split.test == set(ids)
        assert not (split.train & split.valid)
        assert not (split.train & split.test)
        assert not (split.valid & split.test)
