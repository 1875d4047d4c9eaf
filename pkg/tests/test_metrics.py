import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_average_precision, brute_sensitivity
from repmatch.errors import EmptyEvaluationError, SkipSignal
from repmatch.metrics import (MetricsReport, RelevanceJudgment,
                              average_precision, mean_metrics, sensitivity)


class TestSensitivity:
    def test_two_of_two_in_top_three(self):
        assert sensitivity(RelevanceJudgment((1, 0, 1), 2), 3) == 1.0

    def test_nothing_retrieved(self):
        assert sensitivity(RelevanceJudgment((0, 0, 0), 4), 3) == 0.0

    def test_k_smaller_than_l(self):
        assert sensitivity(RelevanceJudgment((1, 1, 1), 5), 3) == 1.0

    def test_l_zero_skips(self):
        with pytest.raises(SkipSignal):
            sensitivity(RelevanceJudgment((0, 0), 0), 3)


class TestAveragePrecision:
    def test_worked_example(self):
        assert average_precision(RelevanceJudgment((1, 0, 1), 2), 3) == \
               pytest.approx(5 / 6, abs=1e-15)

    def test_perfect_ranking(self):
        assert average_precision(RelevanceJudgment((1, 1), 2), 2) == 1.0

    def test_single_relevant_at_rank_two(self):
        assert average_precision(RelevanceJudgment((0, 1), 1), 2) == 0.5

    def test_l_zero_skips(self):
        with pytest.raises(SkipSignal):
            average_precision(RelevanceJudgment((), 0), 3)


judgment_strategy = st.tuples(
    st.lists(st.integers(0, 1), min_size=0, max_size=12),
    st.integers(0, 20),
).filter(lambda t: sum(t[0]) <= t[1])


class TestProperties:
    @settings(max_examples=1000, deadline=None)
    @given(judgment_strategy, st.integers(1, 10))
    def test_ap_bounded_by_sensitivity(self, pair, k):
        rel, total = pair
        if total == 0:
            return
        j = RelevanceJudgment(tuple(rel), total)
        s = sensitivity(j, k)
        ap = average_precision(j, k)
        assert 0.0 <= ap <= s + 1e-12 <= 1.0 + 1e-12

    @settings(max_examples=1000, deadline=None)
    @given(judgment_strategy, st.integers(1, 10))
    def test_matches_brute_force(self, pair, k):
        rel, total = pair
        if total == 0:
            return
        j = RelevanceJudgment(tuple(rel), total)
        assert sensitivity(j, k) == pytest.approx(
            brute_sensitivity(rel, total, k), abs=1e-12)
        assert average_precision(j, k) == pytest.approx(
            brute_average_precision(rel, total, k), abs=1e-12)

    @settings(max_examples=500, deadline=None)
    @given(judgment_strategy, st.integers(1, 8))
    def test_promoting_relevant_item_never_hurts_ap(self, pair, k):
        rel, total = pair
        if total == 0:
            return
        rel = list(rel)
        ups = [i for i in range(1, len(rel)) if rel[i] == 1 and rel[i - 1] == 0]
        if not ups:
            return
        i = ups[0]
        moved = list(rel)
        moved[i - 1], moved[i] = moved[i], moved[i - 1]
        before = average_precision(RelevanceJudgment(tuple(rel), total), k)
        after = average_precision(RelevanceJudgment(tuple(moved), total), k)
        assert after >= before - 1e-12

    def test_permuting_trailing_irrelevant_keeps_sensitivity(self):
        a = RelevanceJudgment((1, 0, 0, 0), 1)
        b = RelevanceJudgment((1, 0, 0, 0), 1)
        for k in (1, 2, 3, 4):
            assert sensitivity(a, k) == sensitivity(b, k)


class TestMeanMetrics:
    def test_arithmetic_mean(self):
        js = [RelevanceJudgment((1, 1, 1), 3), RelevanceJudgment((0, 1, 0), 1)]
        report = mean_metrics(js, ks=(3,))
        assert report.per_k[3]["map"] == pytest.approx((1.0 + 0.5) / 2, abs=1e-12)

    def test_singleton(self):
        report = mean_metrics([RelevanceJudgment((1, 0, 1), 2)], ks=(3,))
        assert report.per_k[3]["ms"] == 1.0
        assert report.per_k[3]["map"] == pytest.approx(5 / 6, abs=1e-15)

    def test_skipped_pairs_counted(self):
        js = [RelevanceJudgment((1,), 1), RelevanceJudgment((0, 0), 0)]
        report = mean_metrics(js, ks=(1,))
        assert report.evaluated_pairs == 1
        assert report.skipped_pairs == 1

    def test_all_skipped_raises(self):
        with pytest.raises(EmptyEvaluationError):
            mean_metrics([RelevanceJudgment((), 0)], ks=(3,))

    def test_json_and_table_rendering(self):
        report = mean_metrics([RelevanceJudgment((1, 0, 1), 2)], ks=(3, 5))
        obj = report.to_json()
        assert '"per_k"' in obj and obj.endswith("\n")
        table = report.to_table("tfidf+mlp")
        assert "MS(3)" in table and "MAP(5)" in table and "tfidf+mlp" in table
