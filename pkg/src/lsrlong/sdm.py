"""Sequential dependence scoring over positional sparse representations.

Three potentials are summed over the query:

* term potential: query weight times the largest weight the term receives at
  any position of any segment (max pooling followed by a dot product);
* phrase potential: best weighted match of a consecutive query n-gram against
  consecutive positions of one segment;
* window potential: best unordered match of a query span inside a window of
  ``window_size`` positions of one segment, each term taking its largest
  weight inside the window.

Phrases and windows never cross segment boundaries; windows are clipped at
the segment end. In exact mode the phrase and window potentials only see
self-translation entries (a position may only match its own surface token);
the term potential keeps the full expansion-bearing matrix in both modes.

All potentials are linear in the stored weights; missing entries count as 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from lsrlong.core import (
    EXACT,
    SPAN_FULL,
    DocumentRep,
    QueryRep,
    SdmParams,
    SegmentRep,
    ValidationError,
)


class MissingTokensError(ValidationError):
    pass


def restrict_to_exact(s: SegmentRep) -> SegmentRep:
    if s.tokens is None:
        raise MissingTokensError(
            f"segment {s.doc_id}/{s.seg_index} has no token sequence; exact matching needs "
            "surface term ids (supply 'tokens' when encoding or use soft mode)"
        )
    kept = tuple(e for e in s.entries if e[1] == s.tokens[e[0]])
    return SegmentRep(s.doc_id, s.seg_index, s.length, kept, s.tokens)


def restrict_document(d: DocumentRep) -> DocumentRep:
    return DocumentRep(d.doc_id, tuple(restrict_to_exact(s) for s in d.segments))


def spans(num_terms: int, params: SdmParams) -> List[Tuple[int, int]]:
    """(start, span) pairs scored by the window potential."""
    if params.span == SPAN_FULL:
        return [(0, num_terms)] if num_terms else []
    n = params.ngram_order
    return [(i, n) for i in range(num_terms - n + 1)]


def _matrix(seg: SegmentRep, columns: Dict[int, int]) -> np.ndarray:
    m = np.zeros((seg.length, len(columns)), dtype=np.float64)
    for t, (pos, w) in seg.by_term.items():
        c = columns.get(t)
        if c is not None:
            m[pos, c] = w
    return m


@dataclass(frozen=True)
class MatchContext:
    query: QueryRep
    doc: DocumentRep
    params: SdmParams

    def __post_init__(self):
        if self.params.mode == EXACT:
            missing = [s.seg_index for s in self.doc.segments if s.tokens is None]
            if missing:
                raise MissingTokensError(
                    f"exact mode needs token sequences; document {self.doc.doc_id!r} lacks them "
                    f"for segments {missing} (re-encode with tokens or use --sdm soft)"
                )

    @cached_property
    def _columns(self) -> Tuple[Dict[int, int], np.ndarray, np.ndarray]:
        columns: Dict[int, int] = {}
        for t in self.query.term_ids:
            columns.setdefault(t, len(columns))
        cols = np.array([columns[t] for t in self.query.term_ids], dtype=np.int64)
        weights = np.array(self.query.weights, dtype=np.float64)
        return columns, cols, weights

    @cached_property
    def _term_max(self) -> np.ndarray:
        columns, _, _ = self._columns
        best = np.zeros(len(columns))
        for seg in self.doc.segments:
            for t, (_, w) in seg.by_term.items():
                c = columns.get(t)
                if c is not None:
                    best[c] = max(best[c], w.max())
        return best

    @cached_property
    def _position_tables(self) -> List[np.ndarray]:
        columns, _, _ = self._columns
        segs = self.doc.segments
        if self.params.mode == EXACT:
            segs = [restrict_to_exact(s) for s in segs]
        return [_matrix(s, columns) for s in segs if s.length > 0]

    @cached_property
    def _window_tables(self) -> List[np.ndarray]:
        # row r = per-term max over positions [r, r + p), clipped at the segment end
        p = self.params.window_size
        out = []
        for m in self._position_tables:
            padded = np.vstack([m, np.zeros((p - 1, m.shape[1]))])
            out.append(sliding_window_view(padded, p, axis=0).max(axis=-1))
        return out

    # unweighted potentials (lambda = 1)

    def term_match(self, i: int) -> float:
        _, cols, w = self._columns
        return float(w[i] * self._term_max[cols[i]])

    def phrase_match(self, start: int) -> float:
        _, cols, w = self._columns
        k = self.params.ngram_order - 1
        if start < 0 or start + k >= len(cols):
            raise IndexError(f"n-gram at {start} does not fit a {len(cols)}-term query")
        best = 0.0
        for m in self._position_tables:
            length = m.shape[0]
            if length <= k:
                continue
            acc = np.zeros(length - k)
            for l in range(k + 1):
                acc += w[start + l] * m[l:length - k + l, cols[start + l]]
            best = max(best, float(acc.max()))
        return best

    def window_match(self, start: int, span: int) -> float:
        _, cols, w = self._columns
        if start < 0 or span < 1 or start + span > len(cols):
            raise IndexError(f"span ({start}, {span}) does not fit a {len(cols)}-term query")
        c = cols[start:start + span]
        ws = w[start:start + span]
        best = 0.0
        for r in self._window_tables:
            best = max(best, float((r[:, c] @ ws).max()))
        return best

    def components(self) -> Tuple[float, float, float]:
        """Unweighted (term, phrase, window) sums; the score is their dot with the lambdas."""
        n_terms = len(self.query)
        _, cols, w = self._columns
        term = float(np.dot(w, self._term_max[cols])) if n_terms else 0.0
        n = self.params.ngram_order
        phrase = sum(self.phrase_match(i) for i in range(n_terms - n + 1))
        window = sum(self.window_match(i, m) for i, m in spans(n_terms, self.params))
        return term, float(phrase), float(window)


def psi_st(q_term_index: int, ctx: MatchContext) -> float:
    return ctx.params.lambda_t * ctx.term_match(q_term_index)


def psi_so(start: int, ctx: MatchContext) -> float:
    return ctx.params.lambda_o * ctx.phrase_match(start)


def psi_su(start: int, span: int, ctx: MatchContext) -> float:
    return ctx.params.lambda_u * ctx.window_match(start, span)


def sdm_components(q: QueryRep, d: DocumentRep, params: SdmParams) -> Tuple[float, float, float]:
    return MatchContext(q, d, params).components()


def sdm_score(q: QueryRep, d: DocumentRep, params: SdmParams) -> float:
    term, phrase, window = sdm_components(q, d, params)
    return params.lambda_t * term + params.lambda_o * phrase + params.lambda_u * window


def brute_force_score(q: QueryRep, d: DocumentRep, params: SdmParams) -> float:
    """Reference scorer: direct nested loops, no tables or vectorisation."""
    if params.mode == EXACT:
        prox = [restrict_to_exact(s) for s in d.segments]
    else:
        prox = list(d.segments)

    def lookup(segs: Sequence[SegmentRep]):
        return [({(p, t): w for p, t, w in s.entries}, s.length) for s in segs]

    full = lookup(d.segments)
    near = lookup(prox)
    terms = q.terms
    score = 0.0

    for tid, wq in terms:
        best = 0.0
        for table, length in full:
            for r in range(length):
                best = max(best, wq * table.get((r, tid), 0.0))
        score += params.lambda_t * best

    k = params.ngram_order - 1
    for i in range(len(terms) - k):
        best = 0.0
        for table, length in near:
            for r in range(length - k):
                s = 0.0
                for l in range(k + 1):
                    tid, wq = terms[i + l]
                    s += wq * table.get((r + l, tid), 0.0)
                best = max(best, s)
        score += params.lambda_o * best

    p = params.window_size
    for start, span in spans(len(terms), params):
        best = 0.0
        for table, length in near:
            for r in range(length):
                s = 0.0
                for tid, wq in terms[start:start + span]:
                    inner = 0.0
                    for pos in range(r, min(r + p, length)):
                        inner = max(inner, table.get((pos, tid), 0.0))
                    s += wq * inner
                best = max(best, s)
        score += params.lambda_u * best

    return score
