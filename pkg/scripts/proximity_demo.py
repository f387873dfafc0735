"""Score adjacent vs. scattered documents under every scorer.

    python3 scripts/proximity_demo.py --pairs 200
"""

import argparse
from collections import Counter

from lsrlong.core import SdmParams
from lsrlong.scorers import SCORER_NAMES, get_scorer
from lsrlong.synthetic import gen_proximity_pair, gen_queries


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--lambdas", type=float, nargs=3, default=(0.85, 0.10, 0.05))
    args = ap.parse_args()

    params = SdmParams(*args.lambdas)
    scorers = [get_scorer(n, params) for n in SCORER_NAMES]
    outcome = {s.name: Counter() for s in scorers}
    queries = gen_queries(args.pairs, 1000, seed=args.seed, min_terms=2, max_terms=5)
    for i, q in enumerate(queries):
        adj, sct = gen_proximity_pair(q, seed=args.seed + i)
        for s in scorers:
            a, b = s(q, adj), s(q, sct)
            outcome[s.name]["adjacent" if a > b else "scattered" if b > a else "tie"] += 1

    print(f"{'scorer':<10}{'adjacent':>10}{'tie':>6}{'scattered':>11}")
    for name, c in outcome.items():
        print(f"{name:<10}{c['adjacent']:>10}{c['tie']:>6}{c['scattered']:>11}")


if __name__ == "__main__":
    main()
