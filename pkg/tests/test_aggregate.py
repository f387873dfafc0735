import pytest
from hypothesis import given

from lsrlong.aggregate import (
    EmptyDocumentError,
    aggregate_rep_max,
    aggregate_rep_mean,
    aggregate_rep_sum,
    aggregate_score,
    score_max,
    score_mean,
    score_rep_max,
    score_sum,
    segment_scores,
)
from lsrlong.core import DocumentRep, QueryRep, SegmentRep, dot, query_to_vector

from conftest import documents, queries, rel_close


def pooled_doc(*vectors, doc_id="d"):
    """One-position-per-term segments whose max pool is exactly each vector."""
    segs = []
    for i, v in enumerate(vectors):
        entries = tuple((0, t, w) for t, w in v.items())
        segs.append(SegmentRep(doc_id, i, 1, entries))
    return DocumentRep(doc_id, tuple(segs))


def test_rep_max_examples():
    assert aggregate_rep_max(pooled_doc({1: 1.0, 2: 2.0}, {1: 3.0})) == {1: 3.0, 2: 2.0}
    assert aggregate_rep_max(pooled_doc({4: 0.5, 5: 1.0})) == {4: 0.5, 5: 1.0}
    assert aggregate_rep_max(pooled_doc({1: 1.0}, {1: 2.0}, {1: 0.5})) == {1: 2.0}


def test_zero_segments_rejected():
    empty = DocumentRep("d", ())
    q = QueryRep("q", ((1, 1.0),))
    for fn in (score_rep_max, score_max, score_sum, score_mean):
        with pytest.raises(EmptyDocumentError):
            fn(q, empty)
    with pytest.raises(EmptyDocumentError):
        aggregate_rep_max(empty)


def test_score_rep_max_examples():
    assert score_rep_max(QueryRep("q", ((7, 1.0),)), pooled_doc({7: 2.0}, {7: 5.0})) == 5.0
    assert score_rep_max(QueryRep("q", ()), pooled_doc({7: 2.0})) == 0.0
    q = QueryRep("q", ((7, 2.0), (9, 1.0)))
    assert score_rep_max(q, pooled_doc({7: 1.0}, {9: 3.0})) == 5.0


def test_score_max_examples():
    q = QueryRep("q", ((1, 1.0),))
    assert score_max(q, pooled_doc({1: 3.0}, {1: 5.0}, {1: 1.0})) == 5.0
    assert score_max(q, pooled_doc({1: 3.0})) == 3.0
    q = QueryRep("q", ((7, 1.0), (9, 1.0)))
    assert score_max(q, pooled_doc({7: 4.0}, {7: 1.0, 9: 2.0})) == 4.0


def test_sum_mean_examples():
    q = QueryRep("q", ((1, 1.0),))
    d = pooled_doc({1: 3.0}, {1: 5.0})
    assert score_sum(q, d) == 8.0 and score_mean(q, d) == 4.0
    one = pooled_doc({1: 3.0})
    assert score_sum(q, one) == 3.0 == score_mean(q, one)
    # appending a segment with no overlap: sum unchanged, mean drops by 2/3
    longer = pooled_doc({1: 3.0}, {1: 5.0}, {42: 9.0})
    assert score_sum(q, longer) == 8.0
    assert score_mean(q, longer) < score_mean(q, d)
    assert score_mean(q, longer) == pytest.approx(8.0 / 3)


def test_aggregate_score_by_name():
    q = QueryRep("q", ((1, 1.0),))
    d = pooled_doc({1: 3.0}, {1: 5.0})
    assert aggregate_score("rep-max", q, d) == 5.0
    assert aggregate_score("sum", q, d) == 8.0
    with pytest.raises(ValueError):
        aggregate_score("median", q, d)


@given(queries(), documents())
def test_distributivity(q, d):
    qv = query_to_vector(q)
    assert rel_close(dot(qv, aggregate_rep_sum(d)), score_sum(q, d))
    mean = dot(qv, aggregate_rep_mean(d))
    assert mean == pytest.approx(score_mean(q, d), rel=1e-9, abs=1e-300)


@given(queries(), documents())
def test_ordering_of_strategies(q, d):
    rm, sm, mean = score_rep_max(q, d), score_max(q, d), score_mean(q, d)
    assert rm >= sm * (1 - 1e-12)
    assert sm >= mean * (1 - 1e-12)


@given(queries(), documents(max_segs=3))
def test_appending_non_overlapping_segment(q, d):
    qterms = set(q.term_ids)
    extra_term = max(qterms) + 1
    extra = SegmentRep(d.doc_id, len(d), 2, ((0, extra_term, 1.0), (1, extra_term, 2.0)))
    longer = DocumentRep(d.doc_id, d.segments + (extra,))
    n = len(d)
    assert score_max(q, longer) == score_max(q, d)
    assert score_rep_max(q, longer) == score_rep_max(q, d)
    assert score_sum(q, longer) == score_sum(q, d)
    assert score_mean(q, longer) == pytest.approx(score_mean(q, d) * n / (n + 1), rel=1e-12, abs=1e-300)


def test_segment_scores():
    q = QueryRep("q", ((1, 2.0),))
    assert segment_scores(q, pooled_doc({1: 1.0}, {2: 1.0})) == [2.0, 0.0]
