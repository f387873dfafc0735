"""Classic lexical baselines over raw token corpora: BM25 and the original
sequential dependence model with Dirichlet-style smoothing."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

DEFAULT_MU = 2500.0
ZERO_FLOOR_FRACTION = 0.5


@dataclass
class CorpusStats:
    docs: Dict[str, Tuple[str, ...]]
    doc_lengths: Dict[str, int]
    term_cf: Counter
    doc_freq: Counter
    total_tokens: int
    _phrase_cf: Dict[tuple, int] = field(default_factory=dict, repr=False)
    _window_cf: Dict[tuple, int] = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, docs: Mapping[str, Sequence[str]]) -> "CorpusStats":
        frozen = {d: tuple(toks) for d, toks in docs.items()}
        cf: Counter = Counter()
        df: Counter = Counter()
        for toks in frozen.values():
            cf.update(toks)
            df.update(set(toks))
        lengths = {d: len(t) for d, t in frozen.items()}
        return cls(frozen, lengths, cf, df, sum(lengths.values()))

    @property
    def doc_count(self) -> int:
        return len(self.docs)

    @property
    def avg_doc_length(self) -> float:
        return self.total_tokens / self.doc_count if self.doc_count else 0.0

    def phrase_cf(self, ngram: Sequence[str]) -> int:
        key = tuple(ngram)
        if key not in self._phrase_cf:
            self._phrase_cf[key] = sum(phrase_tf(key, t) for t in self.docs.values())
        return self._phrase_cf[key]

    def window_cf(self, terms: Sequence[str], n: int) -> int:
        key = (tuple(terms), n)
        if key not in self._window_cf:
            self._window_cf[key] = sum(window_tf(key[0], t, n) for t in self.docs.values())
        return self._window_cf[key]


def phrase_tf(ngram: Sequence[str], tokens: Sequence[str]) -> int:
    """Exact ordered occurrences (#1)."""
    ngram = tuple(ngram)
    k = len(ngram)
    if k == 0:
        return 0
    return sum(1 for i in range(len(tokens) - k + 1) if tuple(tokens[i:i + k]) == ngram)


def window_tf(terms: Sequence[str], tokens: Sequence[str], n: int) -> int:
    """Unordered-window occurrences (#uwN).

    Counts distinct minimal intervals of at most ``n`` positions that contain
    every query term (as a multiset) in any order.
    """
    need = Counter(terms)
    if not need:
        return 0
    count = 0
    for i in range(len(tokens)):
        if tokens[i] not in need:
            continue
        have: Counter = Counter()
        for j in range(i, min(i + n, len(tokens))):
            if tokens[j] in need:
                have[tokens[j]] += 1
            if all(have[t] >= c for t, c in need.items()):
                # minimal iff dropping the left end breaks coverage
                have[tokens[i]] -= 1
                if have[tokens[i]] < need[tokens[i]]:
                    count += 1
                break
    return count


def dirichlet_alpha(doc_length: int, mu: float = DEFAULT_MU) -> float:
    return mu / (doc_length + mu)


def _smoothed_log(tf: int, cf: int, doc_length: int, total: int, alpha: float, zero_floor: float) -> float:
    if doc_length <= 0 or total <= 0:
        raise ValueError("document and collection lengths must be positive")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"smoothing factor must lie in (0, 1), got {alpha}")
    if tf == 0 and cf == 0:
        return math.log(alpha * zero_floor / total)
    return math.log((1.0 - alpha) * tf / doc_length + alpha * cf / total)


@dataclass(frozen=True)
class ClassicSdmParams:
    lambda_t: float = 0.85
    lambda_o: float = 0.10
    lambda_u: float = 0.05
    window: int = 8
    mu: float = DEFAULT_MU
    alpha: Optional[float] = None  # fixed smoothing factor; None means Dirichlet from mu
    zero_floor: float = ZERO_FLOOR_FRACTION

    def alpha_for(self, doc_length: int) -> float:
        return self.alpha if self.alpha is not None else dirichlet_alpha(doc_length, self.mu)


def classic_psi_t(term: str, doc: str, stats: CorpusStats, alpha: float, lambda_t: float,
                  zero_floor: float = ZERO_FLOOR_FRACTION) -> float:
    if lambda_t == 0:
        return 0.0
    toks = stats.docs[doc]
    tf = toks.count(term)
    return lambda_t * _smoothed_log(tf, stats.term_cf[term], len(toks), stats.total_tokens, alpha, zero_floor)


def classic_psi_o(ngram: Sequence[str], doc: str, stats: CorpusStats, alpha: float, lambda_o: float,
                  zero_floor: float = ZERO_FLOOR_FRACTION) -> float:
    if lambda_o == 0:
        return 0.0
    toks = stats.docs[doc]
    tf = phrase_tf(ngram, toks)
    return lambda_o * _smoothed_log(tf, stats.phrase_cf(ngram), len(toks), stats.total_tokens, alpha, zero_floor)


def classic_psi_u(terms: Sequence[str], window: int, doc: str, stats: CorpusStats, alpha: float,
                  lambda_u: float, zero_floor: float = ZERO_FLOOR_FRACTION) -> float:
    if lambda_u == 0:
        return 0.0
    toks = stats.docs[doc]
    tf = window_tf(terms, toks, window)
    cf = stats.window_cf(terms, window)
    return lambda_u * _smoothed_log(tf, cf, len(toks), stats.total_tokens, alpha, zero_floor)


def classic_sdm_score(query_tokens: Sequence[str], doc: str, stats: CorpusStats,
                      params: ClassicSdmParams = ClassicSdmParams()) -> float:
    alpha = params.alpha_for(stats.doc_lengths[doc])
    score = sum(classic_psi_t(t, doc, stats, alpha, params.lambda_t, params.zero_floor) for t in query_tokens)
    for i in range(len(query_tokens) - 1):
        pair = query_tokens[i:i + 2]
        score += classic_psi_o(pair, doc, stats, alpha, params.lambda_o, params.zero_floor)
        score += classic_psi_u(pair, params.window, doc, stats, alpha, params.lambda_u, params.zero_floor)
    return score


def query_likelihood(query_tokens: Sequence[str], doc: str, stats: CorpusStats, mu: float = DEFAULT_MU) -> float:
    """Dirichlet-smoothed unigram query log-likelihood."""
    toks = stats.docs[doc]
    tf = Counter(toks)
    dl = len(toks)
    return sum(
        math.log((tf[t] + mu * stats.term_cf[t] / stats.total_tokens) / (dl + mu))
        for t in query_tokens
    )


def bm25_idf(n_docs: int, df: int) -> float:
    return math.log((n_docs - df + 0.5) / (df + 0.5) + 1.0)


def bm25_score(query_tokens: Sequence[str], doc: str, stats: CorpusStats,
               k1: float = 0.9, b: float = 0.4) -> float:
    toks = stats.docs[doc]
    tf = Counter(toks)
    norm = k1 * (1.0 - b + b * len(toks) / stats.avg_doc_length) if stats.avg_doc_length else k1
    score = 0.0
    for t in query_tokens:
        f = tf[t]
        if f:
            score += bm25_idf(stats.doc_count, stats.doc_freq[t]) * f * (k1 + 1.0) / (f + norm)
    return score


def rank_corpus(scorer, query_tokens: Sequence[str], stats: CorpusStats, **kw) -> List[Tuple[str, float]]:
    scored = [(d, scorer(query_tokens, d, stats, **kw)) for d in stats.docs]
    return sorted(scored, key=lambda x: (-x[1], x[0]))
