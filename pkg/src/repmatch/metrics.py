"""Ranking quality metrics: modified sensitivity and average precision at K.

For one (document, requirement) pair with L relevant annotations and a
ranked recommendation list whose i-th entry has relevance rel(i):

    S(K)  = |top-K recommendations that are relevant| / min(K, L)
    P(i)  = |top-i recommendations that are relevant| / i
    AP(K) = (1 / min(K, L)) * sum_{i=1..K} P(i) * rel(i)

MS(K) and MAP(K) are unweighted means over all (document, requirement)
pairs; pairs with L = 0 cannot be scored and are skipped, with skip counts
surfaced in the report.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import EmptyEvaluationError, SkipSignal


@dataclass(frozen=True)
class RelevanceJudgment:
    ranked_rel: tuple[int, ...]  # rel(i) for the i-th recommendation, 0/1
    relevant_total: int          # L, number of relevant annotations

    def __post_init__(self):
        if self.relevant_total < 0:
            raise ValueError("relevant_total must be >= 0")
        if sum(self.ranked_rel) > self.relevant_total:
            raise ValueError("more relevant hits than annotations")


def sensitivity(j: RelevanceJudgment, k: int) -> float:
    if j.relevant_total == 0:
        raise SkipSignal("no relevant annotations for this pair")
    hits = sum(j.ranked_rel[:k])
    return hits / min(k, j.relevant_total)


def average_precision(j: RelevanceJudgment, k: int) -> float:
    if j.relevant_total == 0:
        raise SkipSignal("no relevant annotations for this pair")
    total = 0.0
    hits = 0
    for i, rel in enumerate(j.ranked_rel[:k], start=1):
        hits += rel
        if rel:
            total += hits / i
    return total / min(k, j.relevant_total)


@dataclass(frozen=True)
class MetricsReport:
    per_k: dict  # k -> {"ms": float, "map": float}
    evaluated_pairs: int
    skipped_pairs: int

    def to_json(self) -> str:
        obj = {
            "per_k": {str(k): self.per_k[k] for k in sorted(self.per_k)},
            "evaluated_pairs": self.evaluated_pairs,
            "skipped_pairs": self.skipped_pairs,
        }
        return json.dumps(obj, sort_keys=True, indent=2) + "\n"

    def to_table(self, label: str = "model") -> str:
        ks = sorted(self.per_k)
        header = ["model"] + [f"MS({k})" for k in ks] + [f"MAP({k})" for k in ks]
        row = [label] + [f"{100 * self.per_k[k]['ms']:.1f}" for k in ks] \
                      + [f"{100 * self.per_k[k]['map']:.1f}" for k in ks]
        widths = [max(len(h), len(r)) for h, r in zip(header, row)]
        lines = [
            "  ".join(h.ljust(w) for h, w in zip(header, widths)),
            "  ".join(r.ljust(w) for r, w in zip(row, widths)),
        ]
        return "\n".join(lines) + "\n"


def mean_metrics(judgments, ks=(3, 5)) -> MetricsReport:
    """Unweighted means of S(K) and AP(K) over all scorable pairs."""
    per_k = {k: {"ms": 0.0, "map": 0.0} for k in ks}
    evaluated = 0
    skipped = 0
    for j in judgments:
        if j.relevant_total == 0:
            skipped += 1
            continue
        evaluated += 1
        for k in ks:
            per_k[k]["ms"] += sensitivity(j, k)
            per_k[k]["map"] += average_precision(j, k)
    if evaluated == 0:
        raise EmptyEvaluationError("all (document, requirement) pairs were skipped")
    for k in ks:
        per_k[k]["ms"] /= evaluated
        per_k[k]["map"] /= evaluated
    return MetricsReport(per_k=per_k, evaluated_pairs=evaluated, skipped_pairs=skipped)
