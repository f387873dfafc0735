"""Grid search of the three SDM weights on training triplets.

The score is linear in the weights, so each triplet is scored once per
potential and every grid point is then a dot product. Candidates live on the
2-simplex; rescaling all weights by a positive constant never changes which
document of a triplet wins, so the simplex loses nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from lsrlong.core import DocumentRep, QueryRep, SdmParams
from lsrlong.ingest import TripletRecord
from lsrlong.sdm import sdm_components

DEFAULT_LAMBDAS = (0.85, 0.10, 0.05)


@dataclass(frozen=True)
class GridSpec:
    step: float = 0.05
    include: Tuple[Tuple[float, float, float], ...] = (DEFAULT_LAMBDAS,)
    points: Tuple[Tuple[float, float, float], ...] = ()  # explicit grid overrides step

    def candidates(self, extra: Sequence[Sequence[float]] = ()) -> List[Tuple[float, float, float]]:
        """Simplex grid plus ``include`` and ``extra``; an explicit ``points`` list is used as is."""
        if self.points:
            return [_normalise(p) for p in self.points]
        if not 0 < self.step <= 1:
            raise ValueError(f"grid step must lie in (0, 1], got {self.step}")
        n = int(round(1.0 / self.step))
        if abs(n * self.step - 1.0) > 1e-9:
            raise ValueError(f"grid step {self.step} does not divide 1")
        grid = [
            (round(i / n, 10), round(j / n, 10), round((n - i - j) / n, 10))
            for i in range(n + 1) for j in range(n + 1 - i)
        ]
        for p in tuple(self.include) + tuple(extra):
            p = _normalise(p)
            if not any(np.allclose(p, g, atol=1e-9) for g in grid):
                grid.append(p)
        return grid


def _normalise(p: Sequence[float]) -> Tuple[float, float, float]:
    if len(p) != 3 or min(p) < 0 or sum(p) <= 0:
        raise ValueError(f"lambda point must be three non-negative weights, got {p}")
    s = float(sum(p))
    return tuple(round(x / s, 10) for x in p)


@dataclass
class TuneResult:
    params: SdmParams
    accuracy: float
    default_accuracy: float
    num_triplets: int
    grid: List[Dict] = field(default_factory=list)

    def report(self) -> Dict:
        p = self.params
        return {
            "lambda_t": p.lambda_t,
            "lambda_o": p.lambda_o,
            "lambda_u": p.lambda_u,
            "mode": p.mode,
            "ngram_order": p.ngram_order,
            "window_size": p.window_size,
            "span": p.span,
            "accuracy": self.accuracy,
            "default_accuracy": self.default_accuracy,
            "num_triplets": self.num_triplets,
            "grid": self.grid,
        }


def triplet_components(
    triplets: Sequence[TripletRecord],
    queries: Mapping[str, QueryRep],
    docs: Mapping[str, DocumentRep],
    params: SdmParams,
) -> Tuple[np.ndarray, np.ndarray]:
    """(n, 3) unweighted potential sums for the positive and negative documents."""
    pos = np.array([sdm_components(queries[t.query_id], docs[t.positive_doc_id], params) for t in triplets])
    neg = np.array([sdm_components(queries[t.query_id], docs[t.negative_doc_id], params) for t in triplets])
    return pos.reshape(-1, 3), neg.reshape(-1, 3)


def pairwise_accuracy(pos: np.ndarray, neg: np.ndarray, lambdas: Sequence[float]) -> float:
    lam = np.asarray(lambdas, dtype=np.float64)
    return float(np.mean(pos @ lam > neg @ lam))


def tune_lambdas(
    triplets: Iterable[TripletRecord],
    queries: Mapping[str, QueryRep],
    docs,
    sdm_config: SdmParams = SdmParams(),
    grid: GridSpec = GridSpec(),
) -> TuneResult:
    """Pick the simplex point with the best pairwise triplet accuracy.

    ``docs`` is anything with ``document(doc_id)`` (an index) or a mapping.
    Ties go to the lexicographically largest (lambda_t, lambda_o, lambda_u).
    """
    triplets = list(triplets)
    if not triplets:
        raise ValueError("no triplets to tune on")
    lookup = docs.document if hasattr(docs, "document") else docs.__getitem__

    missing_q = sorted({t.query_id for t in triplets if t.query_id not in queries})
    resolved: Dict[str, DocumentRep] = {}
    missing_d = set()
    for t in triplets:
        for d in (t.positive_doc_id, t.negative_doc_id):
            if d in resolved or d in missing_d:
                continue
            try:
                resolved[d] = lookup(d)
            except KeyError:
                missing_d.add(d)
    if missing_q or missing_d:
        raise KeyError(
            f"unresolvable ids in triplets: queries {missing_q}, documents {sorted(missing_d)}"
        )

    extra = [sdm_config.lambdas] if min(sdm_config.lambdas) >= 0 and sum(sdm_config.lambdas) > 0 else []
    candidates = grid.candidates(extra)
    if not candidates:
        raise ValueError("empty lambda grid")
    pos, neg = triplet_components(triplets, queries, resolved, sdm_config)
    lam = np.array(candidates)
    acc = ((pos @ lam.T) > (neg @ lam.T)).mean(axis=0)
    order = sorted(range(len(candidates)), key=lambda i: (-acc[i], tuple(-x for x in candidates[i])))
    best = order[0]
    bt, bo, bu = candidates[best]
    return TuneResult(
        params=replace(sdm_config, lambda_t=bt, lambda_o=bo, lambda_u=bu),
        accuracy=float(acc[best]),
        default_accuracy=pairwise_accuracy(pos, neg, _normalise(extra[0] if extra else DEFAULT_LAMBDAS)),
        num_triplets=len(triplets),
        grid=[{"lambdas": list(candidates[i]), "accuracy": float(acc[i])} for i in range(len(candidates))],
    )
