from __future__ import annotations

import random

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from lsrlong.core import DocumentRep, QueryRep, SegmentRep

settings.register_profile("lsrlong", deadline=None, max_examples=100)
settings.load_profile("lsrlong")

VOCAB = 8


def random_segment(rng: random.Random, doc_id: str, idx: int, vocab: int = VOCAB, max_len: int = 10,
                   with_tokens: bool = True) -> SegmentRep:
    length = rng.randint(0, max_len)
    tokens = [rng.randrange(vocab) for _ in range(length)]
    entries = {}
    for p, t in enumerate(tokens):
        if rng.random() < 0.8:
            entries[(p, t)] = round(rng.uniform(0.1, 3.0), 4)
        for _ in range(rng.randint(0, 2)):
            entries[(p, rng.randrange(vocab))] = round(rng.uniform(0.1, 3.0), 4)
    return SegmentRep(doc_id, idx, length, tuple((p, t, w) for (p, t), w in entries.items()),
                      tuple(tokens) if with_tokens else None)


def random_document(rng: random.Random, doc_id: str = "d", max_segs: int = 5, **kw) -> DocumentRep:
    n = rng.randint(1, max_segs)
    return DocumentRep(doc_id, tuple(random_segment(rng, doc_id, i, **kw) for i in range(n)))


def random_query(rng: random.Random, vocab: int = VOCAB, max_terms: int = 4, distinct: bool = False) -> QueryRep:
    n = rng.randint(1, max_terms)
    if distinct:
        ids = rng.sample(range(vocab), min(n, vocab))
    else:
        ids = [rng.randrange(vocab) for _ in range(n)]
    return QueryRep("q", tuple((t, round(rng.uniform(0.1, 3.0), 4)) for t in ids))


@st.composite
def segments(draw, doc_id="d", seg_index=0, vocab=VOCAB, max_len=10):
    length = draw(st.integers(0, max_len))
    tokens = draw(st.lists(st.integers(0, vocab - 1), min_size=length, max_size=length))
    weight = st.floats(0.0, 5.0, allow_nan=False, allow_subnormal=False)
    cells = draw(st.dictionaries(
        st.tuples(st.integers(0, max(length - 1, 0)), st.integers(0, vocab - 1)), weight, max_size=3 * length + 1,
    )) if length else {}
    return SegmentRep(doc_id, seg_index, length, tuple((p, t, w) for (p, t), w in cells.items()), tuple(tokens))


@st.composite
def documents(draw, doc_id="d", max_segs=4, **kw):
    n = draw(st.integers(1, max_segs))
    return DocumentRep(doc_id, tuple(draw(segments(doc_id, i, **kw)) for i in range(n)))


@st.composite
def queries(draw, vocab=VOCAB, max_terms=4, distinct=False):
    ids = st.integers(0, vocab - 1)
    if distinct:
        terms = draw(st.lists(ids, min_size=1, max_size=min(max_terms, vocab), unique=True))
    else:
        terms = draw(st.lists(ids, min_size=1, max_size=max_terms))
    weights = draw(st.lists(st.floats(0.0, 5.0, allow_nan=False, allow_subnormal=False), min_size=len(terms), max_size=len(terms)))
    return QueryRep("q", tuple(zip(terms, weights)))


def rel_close(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs(a - b) <= tol * max(abs(a), abs(b))


@pytest.fixture
def rng():
    return random.Random(1234)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
