"""Segment aggregation strategies for long documents.

Representation max pooling collapses the document to a single vector before
scoring; the score-level strategies score every segment on its own. Sum and
mean pooling give the same numbers at either level because the dot product
distributes over vector addition, so each is a single strategy here.
"""

from __future__ import annotations

from enum import Enum
from typing import List

from lsrlong.core import (
    DocumentRep,
    QueryRep,
    SparseVector,
    add_vectors,
    dot,
    max_pool,
    query_to_vector,
)


class AggregationStrategy(str, Enum):
    REP_MAX = "rep-max"
    SCORE_MAX = "score-max"
    SUM = "sum"
    MEAN = "mean"


class EmptyDocumentError(ValueError):
    pass


def _check(d: DocumentRep) -> None:
    if not d.segments:
        raise EmptyDocumentError(f"document {d.doc_id!r} has no segments")


def aggregate_rep_max(d: DocumentRep) -> SparseVector:
    _check(d)
    out: SparseVector = {}
    for seg in d.segments:
        for t, w in max_pool(seg).items():
            if w > out.get(t, 0.0):
                out[t] = w
    return out


def aggregate_rep_sum(d: DocumentRep) -> SparseVector:
    _check(d)
    return add_vectors([max_pool(s) for s in d.segments])


def aggregate_rep_mean(d: DocumentRep) -> SparseVector:
    n = len(d.segments)
    return {t: w / n for t, w in aggregate_rep_sum(d).items()}


def segment_scores(q: QueryRep, d: DocumentRep) -> List[float]:
    _check(d)
    qv = query_to_vector(q)
    return [dot(qv, max_pool(s)) for s in d.segments]


def score_rep_max(q: QueryRep, d: DocumentRep) -> float:
    return dot(query_to_vector(q), aggregate_rep_max(d))


def score_max(q: QueryRep, d: DocumentRep) -> float:
    return max(segment_scores(q, d))


def score_sum(q: QueryRep, d: DocumentRep) -> float:
    return float(sum(segment_scores(q, d)))


def score_mean(q: QueryRep, d: DocumentRep) -> float:
    scores = segment_scores(q, d)
    return float(sum(scores)) / len(scores)


SCORERS = {
    AggregationStrategy.REP_MAX: score_rep_max,
    AggregationStrategy.SCORE_MAX: score_max,
    AggregationStrategy.SUM: score_sum,
    AggregationStrategy.MEAN: score_mean,
}


def aggregate_score(strategy, q: QueryRep, d: DocumentRep) -> float:
    return SCORERS[AggregationStrategy(strategy)](q, d)
