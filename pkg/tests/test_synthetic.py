from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lsrlong.aggregate import score_rep_max
from lsrlong.core import QueryRep, SdmParams, group_documents
from lsrlong.ingest import read_encoded_segments, write_encoded_segments
from lsrlong.sdm import sdm_score
from lsrlong.synthetic import (
    CorpusSpec,
    gen_adversarial,
    gen_corpus,
    gen_proximity_pair,
    gen_queries,
    inject_expansions,
)


def test_corpus_deterministic_and_counted():
    spec = CorpusSpec(num_docs=2, segs_per_doc=2, seed=9)
    a, b = list(gen_corpus(spec)), list(gen_corpus(spec))
    assert a == b and len(a) == 4
    assert list(gen_corpus(CorpusSpec(num_docs=2, segs_per_doc=2, seed=10))) != a


def test_corpus_passes_reader(tmp_path):
    segs = list(gen_corpus(CorpusSpec(num_docs=5, vary_segments=True, seed=1)))
    p = tmp_path / "c.jsonl"
    write_encoded_segments(p, segs)
    assert list(read_encoded_segments(p)) == segs
    assert all(d.has_tokens for d in group_documents(segs))


def test_corpus_spec_errors():
    with pytest.raises(ValueError):
        list(gen_corpus(CorpusSpec(num_docs=0)))
    with pytest.raises(ValueError):
        list(gen_corpus(CorpusSpec(segs_per_doc=0)))
    assert list(gen_corpus(CorpusSpec(segs_per_doc=0, allow_empty_docs=True))) == []
    with pytest.raises(ValueError):
        list(gen_corpus(CorpusSpec(vocab_size=1)))


def test_queries_distinct():
    for q in gen_queries(50, 10, seed=2, max_terms=6):
        assert len(set(q.term_ids)) == len(q)


def test_expansions_only_add():
    doc = next(group_documents(gen_corpus(CorpusSpec(num_docs=1, expansion_rate=0.0, seed=4))))
    more = inject_expansions(doc, 50, seed=4)
    for s, t in zip(doc.segments, more.segments):
        assert set(s.entries) <= set(t.entries)
        assert s.tokens == t.tokens


pair_queries = st.builds(
    lambda ids, ws: QueryRep("q", tuple(zip(ids, ws))),
    st.lists(st.integers(0, 999), min_size=2, max_size=5, unique=True),
    st.lists(st.floats(0.1, 3.0), min_size=5, max_size=5),
)


@given(pair_queries, st.integers(0, 2**31 - 1))
def test_proximity_pair_properties(q, seed):
    adj, sct = gen_proximity_pair(q, seed)
    qterms = set(q.term_ids)

    def query_entries(d):
        return Counter((t, w) for s in d.segments for _, t, w in s.entries if t in qterms)

    assert query_entries(adj) == query_entries(sct)
    hit = [s.seg_index for s in adj.segments if any(t in qterms for _, t, _ in s.entries)]
    assert hit == [0]
    assert all(sum(t in qterms for _, t, _ in s.entries) == 1 for s in sct.segments)
    assert score_rep_max(q, adj) == score_rep_max(q, sct)
    for mode in ("soft", "exact"):
        assert sdm_score(q, adj, SdmParams(1, 0, 0, mode=mode)) == sdm_score(q, sct, SdmParams(1, 0, 0, mode=mode))
        for lam in ((0.8, 0.2, 0.0), (0.8, 0.0, 0.2), (0.0, 0.5, 0.5)):
            p = SdmParams(*lam, mode=mode)
            assert sdm_score(q, adj, p) > sdm_score(q, sct, p)
    assert gen_proximity_pair(q, seed) == (adj, sct)


def test_proximity_pair_needs_two_terms():
    with pytest.raises(ValueError):
        gen_proximity_pair(QueryRep("q", ((1, 1.0),)), 0)


def test_adversarial_shape():
    corpus = gen_adversarial(num_queries=6, segs_per_doc=3, num_distractors=2, seed=1)
    assert len(corpus.segments) == (6 + 2) * 3
    assert len(corpus.queries) == 6 and len(corpus.triplets) == 6
    assert corpus == gen_adversarial(num_queries=6, segs_per_doc=3, num_distractors=2, seed=1)
