"""Shared value types and the sparse-vector primitives every scorer uses.

Sparse vectors are plain ``dict[int, float]`` in canonical form (no explicit
zeros). Segment weights are taken to be already log-scaled and non-negative,
so nothing here applies a further nonlinearity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

SparseVector = Dict[int, float]

EXACT = "exact"
SOFT = "soft"
SPAN_NGRAM = "ngram"
SPAN_FULL = "full"


class ValidationError(ValueError):
    """Raised when a record violates a type invariant."""


def sparse(mapping: Mapping[int, float]) -> SparseVector:
    """Canonical copy of ``mapping`` with zero entries dropped."""
    return {int(t): float(w) for t, w in mapping.items() if w != 0.0}


@dataclass(frozen=True)
class QueryRep:
    query_id: str
    terms: Tuple[Tuple[int, float], ...] = ()

    def __post_init__(self):
        terms = tuple((int(t), float(w)) for t, w in self.terms)
        for t, w in terms:
            if t < 0:
                raise ValidationError(f"query {self.query_id}: negative term id {t}")
            if not w >= 0.0:
                raise ValidationError(f"query {self.query_id}: negative weight {w} for term {t}")
        object.__setattr__(self, "terms", terms)

    @property
    def term_ids(self) -> Tuple[int, ...]:
        return tuple(t for t, _ in self.terms)

    @property
    def weights(self) -> Tuple[float, ...]:
        return tuple(w for _, w in self.terms)

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class SegmentRep:
    """Sparse positional logit matrix of one encoded segment.

    ``entries`` holds ``(position, term_id, weight)`` triples, stored sorted by
    ``(position, term_id)``. ``tokens`` are the surface term ids, one per
    position, and are needed only for exact (self-translation) matching.
    """

    doc_id: str
    seg_index: int
    length: int
    entries: Tuple[Tuple[int, int, float], ...] = ()
    tokens: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.seg_index < 0:
            raise ValidationError(f"{self.doc_id}: negative seg_index {self.seg_index}")
        if self.length < 0:
            raise ValidationError(f"{self.doc_id}/{self.seg_index}: negative length")
        entries = sorted((int(p), int(t), float(w)) for p, t, w in self.entries)
        seen = set()
        for p, t, w in entries:
            if not 0 <= p < self.length:
                raise ValidationError(
                    f"{self.doc_id}/{self.seg_index}: position {p} outside [0, {self.length})"
                )
            if t < 0:
                raise ValidationError(f"{self.doc_id}/{self.seg_index}: negative term id {t}")
            if not w >= 0.0:
                raise ValidationError(
                    f"{self.doc_id}/{self.seg_index}: negative weight {w} at ({p}, {t})"
                )
            if (p, t) in seen:
                raise ValidationError(
                    f"{self.doc_id}/{self.seg_index}: duplicate entry for ({p}, {t})"
                )
            seen.add((p, t))
        object.__setattr__(self, "entries", tuple(entries))
        if self.tokens is not None:
            tokens = tuple(int(t) for t in self.tokens)
            if len(tokens) != self.length:
                raise ValidationError(
                    f"{self.doc_id}/{self.seg_index}: {len(tokens)} tokens for length {self.length}"
                )
            object.__setattr__(self, "tokens", tokens)

    @property
    def has_tokens(self) -> bool:
        return self.tokens is not None

    @cached_property
    def by_term(self) -> Dict[int, Tuple[np.ndarray, np.ndarray]]:
        """term_id -> (positions, weights) arrays."""
        grouped: Dict[int, Tuple[list, list]] = {}
        for p, t, w in self.entries:
            ps, ws = grouped.setdefault(t, ([], []))
            ps.append(p)
            ws.append(w)
        return {
            t: (np.asarray(ps, dtype=np.int64), np.asarray(ws, dtype=np.float64))
            for t, (ps, ws) in grouped.items()
        }


@dataclass(frozen=True)
class DocumentRep:
    doc_id: str
    segments: Tuple[SegmentRep, ...] = field(default_factory=tuple)

    def __post_init__(self):
        segments = tuple(self.segments)
        for i, s in enumerate(segments):
            if s.doc_id != self.doc_id:
                raise ValidationError(f"segment of {s.doc_id!r} inside document {self.doc_id!r}")
            if s.seg_index != i:
                raise ValidationError(
                    f"{self.doc_id}: segment indices must run 0..n-1, found {s.seg_index} at slot {i}"
                )
        object.__setattr__(self, "segments", segments)

    @property
    def has_tokens(self) -> bool:
        return all(s.has_tokens for s in self.segments)

    def truncate(self, num_segments: int) -> "DocumentRep":
        return DocumentRep(self.doc_id, self.segments[:num_segments])

    def __len__(self) -> int:
        return len(self.segments)


@dataclass(frozen=True)
class SdmParams:
    """Weights and shape of the sequential dependence scorer.

    ``span`` picks the term sets fed to the unordered-window potential:
    ``"ngram"`` uses the same consecutive spans as the phrase potential,
    ``"full"`` uses the whole query as one span.
    """

    lambda_t: float = 0.85
    lambda_o: float = 0.10
    lambda_u: float = 0.05
    ngram_order: int = 2
    window_size: int = 8
    mode: str = SOFT
    span: str = SPAN_NGRAM

    def __post_init__(self):
        if self.ngram_order < 2:
            raise ValueError(f"ngram_order must be >= 2, got {self.ngram_order}")
        if self.window_size < 1:
            raise ValueError(f"window_size must be >= 1, got {self.window_size}")
        if self.mode not in (EXACT, SOFT):
            raise ValueError(f"mode must be 'exact' or 'soft', got {self.mode!r}")
        if self.span not in (SPAN_NGRAM, SPAN_FULL):
            raise ValueError(f"span must be 'ngram' or 'full', got {self.span!r}")

    @property
    def lambdas(self) -> Tuple[float, float, float]:
        return (self.lambda_t, self.lambda_o, self.lambda_u)


def group_documents(segments: Iterable[SegmentRep]) -> Iterable[DocumentRep]:
    """Group a contiguous segment stream into documents."""
    current: list = []
    for seg in segments:
        if current and seg.doc_id != current[0].doc_id:
            yield DocumentRep(current[0].doc_id, tuple(current))
            current = []
        current.append(seg)
    if current:
        yield DocumentRep(current[0].doc_id, tuple(current))


def dot(q: Mapping[int, float], d: Mapping[int, float]) -> float:
    if len(q) > len(d):
        q, d = d, q
    # fsum is order independent, so dot(q, d) == dot(d, q) bit for bit
    return math.fsum(w * d[t] for t, w in q.items() if t in d)


def max_pool(s: SegmentRep) -> SparseVector:
    out: Dict[int, float] = {}
    for _, t, w in s.entries:
        if w > out.get(t, 0.0):
            out[t] = w
    return out


def query_to_vector(q: QueryRep) -> SparseVector:
    # duplicates collapse by max, mirroring max pooling on the document side
    out: Dict[int, float] = {}
    for t, w in q.terms:
        if w > out.get(t, 0.0):
            out[t] = w
    return out


def add_vectors(vectors: Sequence[Mapping[int, float]]) -> SparseVector:
    out: Dict[int, float] = {}
    for v in vectors:
        for t, w in v.items():
            out[t] = out.get(t, 0.0) + w
    return sparse(out)
