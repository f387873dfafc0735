"""Ranking metrics (MRR@k, NDCG@k, Recall@k) and a paired t-test with
Bonferroni correction.

Queries are taken from the qrels. A query with no judged-relevant document
is excluded from every mean and listed in ``MetricReport.excluded``; a query
with relevant documents but no run entries scores 0. Unjudged documents are
non-relevant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence

from lsrlong.ingest import Qrels, RunEntry, run_by_query


@dataclass
class MetricReport:
    metric: str
    cutoff: int
    per_query: Dict[str, float] = field(default_factory=dict)
    excluded: List[str] = field(default_factory=list)

    @property
    def name(self) -> str:
        return f"{self.metric}@{self.cutoff}"

    @property
    def mean(self) -> float:
        if not self.per_query:
            return 0.0
        return math.fsum(self.per_query.values()) / len(self.per_query)

    def to_dict(self) -> Dict:
        return {
            "metric": self.name,
            "mean": self.mean,
            "num_queries": len(self.per_query),
            "num_excluded": len(self.excluded),
            "excluded": self.excluded,
            "per_query": self.per_query,
        }


def _ranked_docs(run) -> Dict[str, List[str]]:
    if isinstance(run, Mapping):
        return {q: list(docs) for q, docs in run.items()}
    return {q: [e.doc_id for e in entries] for q, entries in run_by_query(run).items()}


def _evaluate(name: str, k: int, run, qrels: Qrels, fn) -> MetricReport:
    if k < 1:
        raise ValueError(f"cutoff must be >= 1, got {k}")
    ranked = _ranked_docs(run)
    report = MetricReport(name, k)
    for qid in sorted(qrels):
        judged = qrels[qid]
        if not any(r >= 1 for r in judged.values()):
            report.excluded.append(qid)
            continue
        report.per_query[qid] = fn(ranked.get(qid, [])[:k], judged)
    return report


def _rr(top: Sequence[str], judged: Mapping[str, int]) -> float:
    for rank, d in enumerate(top, 1):
        if judged.get(d, 0) >= 1:
            return 1.0 / rank
    return 0.0


def _dcg(gains: Iterable[int]) -> float:
    return math.fsum((2.0 ** g - 1.0) / math.log2(i + 2) for i, g in enumerate(gains))


def _ndcg(k: int):
    def fn(top: Sequence[str], judged: Mapping[str, int]) -> float:
        ideal = _dcg(sorted((r for r in judged.values() if r > 0), reverse=True)[:k])
        return _dcg(judged.get(d, 0) for d in top) / ideal
    return fn


def _recall(top: Sequence[str], judged: Mapping[str, int]) -> float:
    relevant = {d for d, r in judged.items() if r >= 1}
    return len(relevant.intersection(top)) / len(relevant)


def mrr_at_k(run, qrels: Qrels, k: int = 10) -> MetricReport:
    return _evaluate("mrr", k, run, qrels, _rr)


def ndcg_at_k(run, qrels: Qrels, k: int = 10) -> MetricReport:
    return _evaluate("ndcg", k, run, qrels, _ndcg(k))


def recall_at_k(run, qrels: Qrels, k: int = 1000) -> MetricReport:
    return _evaluate("recall", k, run, qrels, _recall)


METRICS = {"mrr": mrr_at_k, "ndcg": ndcg_at_k, "recall": recall_at_k}


def parse_metric(spec: str):
    """``"ndcg@10"`` -> (ndcg_at_k, 10)."""
    name, _, cut = spec.strip().lower().partition("@")
    if name not in METRICS or not cut.isdigit():
        raise ValueError(f"bad metric {spec!r}; expected one of {sorted(METRICS)} with @cutoff")
    return METRICS[name], int(cut)


def evaluate(run, qrels: Qrels, metrics: Sequence[str] = ("mrr@10", "ndcg@10", "recall@1000")) -> Dict[str, MetricReport]:
    out = {}
    for spec in metrics:
        fn, k = parse_metric(spec)
        report = fn(run, qrels, k)
        out[report.name] = report
    return out


# ---------------------------------------------------------------- significance

def _betacf(a: float, b: float, x: float, eps: float = 1e-15, max_iter: int = 500) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    if math.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


@dataclass(frozen=True)
class TTestResult:
    t: float
    p_raw: float
    p_bonferroni: float
    significant: bool
    degenerate_variance: bool = False
    n: int = 0
    alpha: float = 0.05


def paired_ttest(a: Sequence[float], b: Sequence[float], num_comparisons: int = 1,
                 alpha: float = 0.05) -> TTestResult:
    """Two-sided paired t-test of ``a - b`` with Bonferroni-corrected p."""
    if len(a) != len(b):
        raise ValueError(f"paired vectors differ in length: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise ValueError(f"paired t-test needs at least 2 pairs, got {n}")
    if num_comparisons < 1:
        raise ValueError("num_comparisons must be >= 1")
    diffs = [x - y for x, y in zip(a, b)]
    mean = math.fsum(diffs) / n
    var = math.fsum((d - mean) ** 2 for d in diffs) / (n - 1)
    degenerate = False
    if var == 0.0:
        if mean == 0.0:
            t, p = 0.0, 1.0
        else:
            t, p, degenerate = math.copysign(math.inf, mean), 0.0, True
    else:
        t = mean / math.sqrt(var / n)
        p = t_two_sided_p(t, n - 1)
    p_corr = min(1.0, p * num_comparisons)
    return TTestResult(t, p, p_corr, p_corr < alpha, degenerate, n, alpha)
