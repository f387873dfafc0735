"""Metric as a function of the number of leading segments kept per document."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Sequence

from lsrlong.core import QueryRep
from lsrlong.eval import evaluate
from lsrlong.index import DEFAULT_CANDIDATE_POOL, Index
from lsrlong.ingest import Qrels, RunList
from lsrlong.scorers import Scorer

CSV_COLUMNS = ("scorer", "segments", "metric", "value")


def search_all(index: Index, queries: Sequence[QueryRep], scorer: Scorer, k: int,
               candidate_pool: int = DEFAULT_CANDIDATE_POOL, threads: int = 1, tag: str = "lsrlong") -> RunList:
    pool = max(candidate_pool, k)

    def one(q):
        return index.retrieve(q, k, scorer, pool, tag=tag)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(one, queries))
    else:
        parts = [one(q) for q in queries]
    return [e for part in parts for e in part]


def run_sweep(index: Index, queries: Sequence[QueryRep], qrels: Qrels, max_segs: int,
              scorers: Sequence[Scorer], metrics: Sequence[str] = ("mrr@10",), k: int = 1000,
              candidate_pool: int = DEFAULT_CANDIDATE_POOL, threads: int = 1) -> List[Dict]:
    if max_segs < 1:
        raise ValueError(f"max_segs must be >= 1, got {max_segs}")
    rows = []
    for s in range(1, max_segs + 1):
        view = index.truncated(s)
        for scorer in scorers:
            run = search_all(view, queries, scorer, k, candidate_pool, threads)
            for name, report in evaluate(run, qrels, metrics).items():
                rows.append({"scorer": scorer.name, "segments": s, "metric": name, "value": report.mean})
    return rows


def sweep_table(rows: Sequence[Dict], metric: str) -> Dict[str, List[float]]:
    """scorer -> values ordered by segment count, for one metric."""
    table: Dict[str, List[float]] = {}
    for r in sorted(rows, key=lambda r: (r["scorer"], r["segments"])):
        if r["metric"] == metric:
            table.setdefault(r["scorer"], []).append(r["value"])
    return table


def write_sweep(rows: Sequence[Dict], out: Path) -> Path:
    """CSV at ``out`` plus a JSON mirror next to it."""
    out = Path(out)
    with open(out, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([r["scorer"], r["segments"], r["metric"], f"{r['value']:.6f}"])
    mirror = out.with_suffix(".json")
    mirror.write_text(json.dumps(list(rows), indent=1) + "\n", encoding="utf-8")
    return mirror
