"""Metric vs. number of segments on the adversarial synthetic corpus.

    python3 scripts/degradation_sweep.py --segs 5 --out sweep.csv
"""

import argparse
from pathlib import Path

from lsrlong.core import SdmParams
from lsrlong.index import build_index
from lsrlong.scorers import get_scorer
from lsrlong.sweep import run_sweep, sweep_table, write_sweep
from lsrlong.synthetic import gen_adversarial
from lsrlong.tune import tune_lambdas


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--queries", type=int, default=40)
    ap.add_argument("--segs", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--metric", default="mrr@10")
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    corpus = gen_adversarial(num_queries=args.queries, segs_per_doc=args.segs, seed=args.seed)
    index = build_index(corpus.segments)
    queries = {q.query_id: q for q in corpus.queries}
    scorers = [get_scorer(n) for n in ("rep-max", "score-max", "sum", "mean")]
    for name, mode in (("exact-sdm", "exact"), ("soft-sdm", "soft")):
        tuned = tune_lambdas(corpus.triplets, queries, index, SdmParams(mode=mode))
        print(f"{name}: tuned lambdas {tuned.params.lambdas}, triplet accuracy {tuned.accuracy:.3f}")
        scorers.append(get_scorer(name, tuned.params))

    rows = run_sweep(index, corpus.queries, corpus.qrels, args.segs, scorers, (args.metric,), k=10,
                     candidate_pool=100)
    table = sweep_table(rows, args.metric)
    print(f"\n{args.metric:<10}" + "".join(f"{s:>8}" for s in range(1, args.segs + 1)))
    for name, values in table.items():
        print(f"{name:<10}" + "".join(f"{v:8.3f}" for v in values))
    if args.out:
        write_sweep(rows, args.out)
        print(f"\nwrote {args.out}")


if __name__ == "__main__":
    main()
