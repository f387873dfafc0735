"""Seeded generators for synthetic encoded corpora, queries, qrels and triplets.

Every segment carries its surface tokens, one self-translation entry per
position, and optionally some expansion entries (a position translating to a
different term). Weights are drawn uniformly from ``weight_range``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from lsrlong.core import DocumentRep, QueryRep, SegmentRep
from lsrlong.ingest import Qrels, TripletRecord

WEIGHT_RANGE = (0.1, 3.0)


@dataclass(frozen=True)
class CorpusSpec:
    num_docs: int = 10
    segs_per_doc: int = 3
    vocab_size: int = 50
    entries_per_seg: int = 12  # positions per segment; each gets a self-translation entry
    seed: int = 0
    expansion_rate: float = 0.3  # extra expansion entries per position
    vary_segments: bool = False  # draw 1..segs_per_doc segments per document
    allow_empty_docs: bool = False
    weight_range: Tuple[float, float] = WEIGHT_RANGE
    doc_prefix: str = "d"


def _weights(rng: np.random.Generator, n: int, weight_range) -> np.ndarray:
    lo, hi = weight_range
    return np.round(rng.uniform(lo, hi, size=n), 6)


def make_segment(doc_id: str, seg_index: int, tokens: Sequence[int], weights: Sequence[float],
                 expansions: Sequence[Tuple[int, int, float]] = ()) -> SegmentRep:
    entries = [(p, int(t), float(w)) for p, (t, w) in enumerate(zip(tokens, weights))]
    entries.extend(expansions)
    return SegmentRep(doc_id, seg_index, len(tokens), tuple(entries), tuple(int(t) for t in tokens))


def gen_corpus(spec: CorpusSpec) -> Iterator[SegmentRep]:
    if spec.num_docs < 1 or spec.vocab_size < 1 or spec.entries_per_seg < 1:
        raise ValueError("num_docs, vocab_size and entries_per_seg must all be >= 1")
    if spec.segs_per_doc < (0 if spec.allow_empty_docs else 1):
        raise ValueError("segs_per_doc must be >= 1 unless empty documents are allowed")
    if spec.expansion_rate > 0 and spec.vocab_size < 2:
        raise ValueError("expansion entries need vocab_size >= 2 (a term other than the token)")
    rng = np.random.default_rng(spec.seed)
    width = len(str(spec.num_docs - 1))
    for i in range(spec.num_docs):
        doc_id = f"{spec.doc_prefix}{i:0{width}d}"
        n_segs = spec.segs_per_doc
        if spec.vary_segments and n_segs > 1:
            n_segs = int(rng.integers(1, n_segs + 1))
        for s in range(n_segs):
            length = spec.entries_per_seg
            tokens = rng.integers(0, spec.vocab_size, size=length)
            weights = _weights(rng, length, spec.weight_range)
            n_exp = int(round(spec.expansion_rate * length))
            expansions = {}
            for _ in range(n_exp):
                p = int(rng.integers(0, length))
                t = int(rng.integers(0, spec.vocab_size))
                if t != tokens[p]:
                    expansions[(p, t)] = float(_weights(rng, 1, spec.weight_range)[0])
            yield make_segment(doc_id, s, tokens, weights,
                               [(p, t, w) for (p, t), w in sorted(expansions.items())])


def gen_queries(num_queries: int, vocab_size: int, seed: int, min_terms: int = 1, max_terms: int = 4,
                distinct: bool = True, weight_range=WEIGHT_RANGE, prefix: str = "q") -> List[QueryRep]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(num_queries):
        n = int(rng.integers(min_terms, max_terms + 1))
        if distinct:
            n = min(n, vocab_size)
            terms = rng.choice(vocab_size, size=n, replace=False)
        else:
            terms = rng.integers(0, vocab_size, size=n)
        weights = _weights(rng, n, weight_range)
        out.append(QueryRep(f"{prefix}{i}", tuple(zip(terms.tolist(), weights.tolist()))))
    return out


def inject_expansions(doc: DocumentRep, vocab_size: int, seed: int, rate: float = 0.5) -> DocumentRep:
    """Copy of ``doc`` with extra non-self-translation entries."""
    rng = np.random.default_rng(seed)
    segs = []
    for s in doc.segments:
        taken = {(p, t) for p, t, _ in s.entries}
        extra = []
        for _ in range(int(round(rate * s.length))):
            p = int(rng.integers(0, s.length))
            t = int(rng.integers(0, vocab_size))
            if (p, t) not in taken and (s.tokens is None or t != s.tokens[p]):
                taken.add((p, t))
                extra.append((p, t, float(_weights(rng, 1, WEIGHT_RANGE)[0])))
        segs.append(SegmentRep(s.doc_id, s.seg_index, s.length, s.entries + tuple(extra), s.tokens))
    return DocumentRep(doc.doc_id, tuple(segs))


# ---------------------------------------------------------------- proximity pairs

def gen_proximity_pair(query: QueryRep, seed: int, vocab_size: int = 1000, seg_length: int = 12,
                       prefix: str = "") -> Tuple[DocumentRep, DocumentRep]:
    """Two documents with the same query-term entries, adjacent vs. scattered.

    Both documents have one segment per query position. In the adjacent
    document the query terms sit consecutively, in query order, inside
    segment 0; in the scattered document each occurrence sits in its own
    segment. Filler positions use terms outside the query.
    """
    n = len(query)
    if n < 2:
        raise ValueError("proximity pairs need a query with at least 2 terms")
    qterms = set(query.term_ids)
    if vocab_size - len(qterms) < 1:
        raise ValueError("vocab_size leaves no room for filler terms")
    seg_length = max(seg_length, n)
    rng = np.random.default_rng(seed)
    fillers = np.array([t for t in range(vocab_size) if t not in qterms][: max(64, 4 * seg_length)])
    qweights = _weights(rng, n, WEIGHT_RANGE)

    def filler_segment():
        toks = rng.choice(fillers, size=seg_length)
        return toks.tolist(), _weights(rng, seg_length, WEIGHT_RANGE).tolist()

    # identical filler for both documents keeps them equal away from the query terms
    base = [filler_segment() for _ in range(n)]
    start = int(rng.integers(0, seg_length - n + 1))
    slots = [int(rng.integers(0, seg_length)) for _ in range(n)]

    adjacent_id = f"{prefix}adj{seed}"
    scattered_id = f"{prefix}sct{seed}"
    adj, sct = [], []
    for s, (toks, ws) in enumerate(base):
        a_toks, a_ws = list(toks), list(ws)
        if s == 0:
            for j, (t, _) in enumerate(query.terms):
                a_toks[start + j], a_ws[start + j] = t, float(qweights[j])
        adj.append(make_segment(adjacent_id, s, a_toks, a_ws))
        s_toks, s_ws = list(toks), list(ws)
        t, _ = query.terms[s]
        s_toks[slots[s]], s_ws[slots[s]] = t, float(qweights[s])
        sct.append(make_segment(scattered_id, s, s_toks, s_ws))
    return DocumentRep(adjacent_id, tuple(adj)), DocumentRep(scattered_id, tuple(sct))


def gen_proximity_triplets(num: int, seed: int, vocab_size: int = 1000, query_terms: Tuple[int, int] = (2, 4),
                           seg_length: int = 12):
    """Triplets where adjacency alone separates positive from negative.

    Returns (queries, docs, triplets) with docs keyed by id.
    """
    rng = np.random.default_rng(seed)
    queries: Dict[str, QueryRep] = {}
    docs: Dict[str, DocumentRep] = {}
    triplets: List[TripletRecord] = []
    for i in range(num):
        n = int(rng.integers(query_terms[0], query_terms[1] + 1))
        terms = rng.choice(vocab_size, size=n, replace=False)
        q = QueryRep(f"t{i}", tuple(zip(terms.tolist(), _weights(rng, n, WEIGHT_RANGE).tolist())))
        pos, neg = gen_proximity_pair(q, seed=int(rng.integers(0, 2**31)), vocab_size=vocab_size,
                                      seg_length=seg_length, prefix=f"t{i}-")
        queries[q.query_id] = q
        docs[pos.doc_id] = pos
        docs[neg.doc_id] = neg
        triplets.append(TripletRecord(q.query_id, pos.doc_id, neg.doc_id))
    return queries, docs, triplets


# ---------------------------------------------------------------- adversarial corpus

@dataclass
class AdversarialCorpus:
    segments: List[SegmentRep]
    queries: List[QueryRep]
    qrels: Qrels
    triplets: List[TripletRecord]


def gen_adversarial(num_queries: int = 40, segs_per_doc: int = 5, seed: int = 0, terms_per_query: int = 3,
                    seg_length: int = 40, num_distractors: int = 20, vocab_size: int = 5000) -> AdversarialCorpus:
    """Corpus where relevance lives in segment 0 and later segments add noise.

    Query ``i`` owns ``terms_per_query`` private terms. Its relevant document
    ``r{i}`` holds all of them, adjacent and strongly weighted, in segment 0.
    Every later segment of ``r{i}`` carries two of the terms of query
    ``i + 1`` at moderate weight and far apart, so for query ``i + 1`` the
    noise of ``r{i}`` piles up under sum pooling while no single segment of
    ``r{i}`` beats the relevant segment. Distractor documents hold filler only.
    """
    if segs_per_doc < 1 or num_queries < 2 or terms_per_query < 2:
        raise ValueError("need segs_per_doc >= 1, num_queries >= 2, terms_per_query >= 2")
    n_query_terms = num_queries * terms_per_query
    if vocab_size < n_query_terms + 10 or seg_length < max(terms_per_query, 20):
        raise ValueError("vocab_size or seg_length too small for the requested corpus")
    rng = np.random.default_rng(seed)
    qterms = [list(range(i * terms_per_query, (i + 1) * terms_per_query)) for i in range(num_queries)]
    filler = np.arange(n_query_terms, vocab_size)

    def filler_tokens():
        return rng.choice(filler, size=seg_length).tolist(), _weights(rng, seg_length, (0.1, 1.0)).tolist()

    queries = [
        QueryRep(f"q{i}", tuple((t, float(w)) for t, w in zip(qterms[i], _weights(rng, terms_per_query, (0.8, 1.2)))))
        for i in range(num_queries)
    ]
    segments: List[SegmentRep] = []
    qrels: Qrels = {}
    triplets: List[TripletRecord] = []
    for i in range(num_queries):
        doc_id = f"r{i}"
        toks, ws = filler_tokens()
        start = int(rng.integers(0, seg_length - terms_per_query + 1))
        for j, t in enumerate(qterms[i]):
            toks[start + j], ws[start + j] = t, float(rng.uniform(2.0, 3.0))
        segments.append(make_segment(doc_id, 0, toks, ws))
        target = qterms[(i + 1) % num_queries]
        for s in range(1, segs_per_doc):
            toks, ws = filler_tokens()
            a, b = rng.choice(len(target), size=2, replace=False)
            p1 = int(rng.integers(0, 5))
            p2 = int(rng.integers(seg_length - 5, seg_length))
            toks[p1], ws[p1] = target[a], float(rng.uniform(1.0, 1.5))
            toks[p2], ws[p2] = target[b], float(rng.uniform(1.0, 1.5))
            segments.append(make_segment(doc_id, s, toks, ws))
        qrels[f"q{i}"] = {doc_id: 1}
        triplets.append(TripletRecord(f"q{i}", doc_id, f"r{(i - 1) % num_queries}"))
    for j in range(num_distractors):
        for s in range(segs_per_doc):
            toks, ws = filler_tokens()
            segments.append(make_segment(f"x{j}", s, toks, ws))
    return AdversarialCorpus(segments, queries, qrels, triplets)
