"""Command line entry point: ``lsrlong <command> ...``.

Every command prints a JSON summary on stdout when it succeeds and exits 0.
Diagnostics go to stderr; failures exit 1 (2 for usage errors). ``--config``
takes a JSON object whose keys mirror the long flags of the chosen command;
flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from lsrlong import baseline, synthetic
from lsrlong.core import SOFT, SPAN_FULL, SPAN_NGRAM, SdmParams, ValidationError
from lsrlong.eval import evaluate, paired_ttest
from lsrlong.index import DEFAULT_CANDIDATE_POOL, Index, build_index
from lsrlong.ingest import (
    rank_scores,
    read_encoded_queries,
    read_encoded_segments,
    read_qrels,
    read_run,
    read_triplets,
    write_encoded_queries,
    write_encoded_segments,
    write_qrels,
    write_run,
    write_triplets,
)
from lsrlong.scorers import SCORER_NAMES, get_scorer
from lsrlong.segmenter import SegmenterConfig, segment_text
from lsrlong.sweep import run_sweep, search_all, write_sweep
from lsrlong.tune import GridSpec, tune_lambdas

log = logging.getLogger("lsrlong")


class CommandError(Exception):
    pass


def _emit(summary: Dict) -> int:
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return 0


def _seed(args) -> None:
    random.seed(args.seed)
    np.random.seed(args.seed)


def _sdm_params(args, mode: Optional[str] = None) -> SdmParams:
    lam = (args.lambda_t, args.lambda_o, args.lambda_u)
    if getattr(args, "lambdas_from", None):
        report = json.loads(Path(args.lambdas_from).read_text(encoding="utf-8"))
        lam = (report["lambda_t"], report["lambda_o"], report["lambda_u"])
    return SdmParams(*lam, ngram_order=args.ngram, window_size=args.window,
                     mode=mode or getattr(args, "sdm", None) or SOFT, span=args.span)


def _add_sdm_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("sequential dependence")
    g.add_argument("--lambda-t", type=float, default=0.85)
    g.add_argument("--lambda-o", type=float, default=0.10)
    g.add_argument("--lambda-u", type=float, default=0.05)
    g.add_argument("--ngram", type=int, default=2)
    g.add_argument("--window", type=int, default=8)
    g.add_argument("--span", choices=[SPAN_NGRAM, SPAN_FULL], default=SPAN_NGRAM,
                   help="term sets for the window potential")


# ---------------------------------------------------------------- commands

def cmd_segment(args) -> int:
    cfg = SegmenterConfig(max_tokens=args.max_tokens)
    n_docs = n_segs = 0
    with open(args.input, encoding="utf-8") as src, open(args.out, "w", encoding="utf-8") as out:
        for lineno, line in enumerate(src, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                doc_id, text = obj["doc_id"], obj["text"]
            except (json.JSONDecodeError, KeyError, TypeError):
                raise CommandError(f"{args.input}:{lineno}: expected {{\"doc_id\", \"text\"}} JSON object")
            for i, seg in enumerate(segment_text(text, cfg)):
                out.write(json.dumps({"doc_id": doc_id, "seg": i, "text": seg}) + "\n")
                n_segs += 1
            n_docs += 1
    return _emit({"command": "segment", "documents": n_docs, "segments": n_segs, "out": args.out})


def cmd_synth(args) -> int:
    out = Path(args.out)
    if args.kind == "corpus":
        spec = synthetic.CorpusSpec(num_docs=args.num_docs, segs_per_doc=args.segs, vocab_size=args.vocab,
                                    entries_per_seg=args.entries, seed=args.seed)
        n = write_encoded_segments(out, synthetic.gen_corpus(spec))
        summary = {"segments": n, "out": str(out)}
        if args.queries_out:
            qs = synthetic.gen_queries(args.num_queries, args.vocab, args.seed + 1)
            summary["queries"] = write_encoded_queries(args.queries_out, qs)
        return _emit({"command": "synth corpus", **summary})

    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "proximity":
        queries, docs, triplets = synthetic.gen_proximity_triplets(args.num_queries, args.seed)
        segs = [s for d in docs.values() for s in d.segments]
        qrels = {t.query_id: {t.positive_doc_id: 1} for t in triplets}
        qs = list(queries.values())
    else:
        adv = synthetic.gen_adversarial(num_queries=args.num_queries, segs_per_doc=args.segs, seed=args.seed)
        segs, qs, qrels, triplets = adv.segments, adv.queries, adv.qrels, adv.triplets
    write_encoded_segments(out / "segments.jsonl", segs)
    write_encoded_queries(out / "queries.jsonl", qs)
    write_qrels(out / "qrels.txt", qrels)
    write_triplets(out / "triplets.tsv", triplets)
    return _emit({"command": f"synth {args.kind}", "segments": len(segs), "queries": len(qs),
                  "triplets": len(triplets), "out": str(out)})


def cmd_index_build(args) -> int:
    index = build_index(read_encoded_segments(args.segments))
    index.save(args.out)
    return _emit({"command": "index build", "documents": index.num_docs, "postings": index.num_postings,
                  "terms": len(index.postings), "has_tokens": index.has_tokens, "out": args.out})


def _scorer_from_args(args):
    if args.sdm:
        return get_scorer(f"{args.sdm}-sdm", _sdm_params(args))
    return get_scorer(args.agg or "score-max")


def cmd_index_search(args) -> int:
    index = Index.load(args.index)
    queries = list(read_encoded_queries(args.queries))
    scorer = _scorer_from_args(args)
    run = search_all(index, queries, scorer, args.k, args.candidate_pool, args.threads, tag=args.tag)
    write_run(args.run, run)
    return _emit({"command": "index search", "scorer": scorer.name, "queries": len(queries),
                  "entries": len(run), "run": args.run})


def cmd_tune(args) -> int:
    index = Index.load(args.index)
    queries = {q.query_id: q for q in read_encoded_queries(args.queries)}
    triplets = list(read_triplets(args.triplets))
    params = _sdm_params(args, mode=args.sdm)
    if params.mode == "exact" and not index.has_tokens:
        raise CommandError("--sdm exact needs an index built from segments with 'tokens'; use --sdm soft")
    result = tune_lambdas(triplets, queries, index, params, GridSpec(step=args.grid_step))
    report = result.report()
    Path(args.out).write_text(json.dumps(report, indent=1) + "\n", encoding="utf-8")
    return _emit({"command": "tune", "lambda_t": report["lambda_t"], "lambda_o": report["lambda_o"],
                  "lambda_u": report["lambda_u"], "accuracy": report["accuracy"],
                  "default_accuracy": report["default_accuracy"], "out": args.out})


def _format_table(rows: List[List[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def cmd_eval(args) -> int:
    qrels = read_qrels(args.qrels)
    metrics = [m for m in args.metrics.split(",") if m]
    reports = evaluate(read_run(args.run), qrels, metrics)
    summary: Dict = {"command": "eval", "run": args.run,
                     "metrics": {name: r.mean for name, r in reports.items()},
                     "excluded_queries": {name: len(r.excluded) for name, r in reports.items()}}
    rows = [["metric", "mean", "queries"]]
    rows += [[name, f"{r.mean:.4f}", str(len(r.per_query))] for name, r in reports.items()]
    if args.compare:
        other = evaluate(read_run(args.compare), qrels, metrics)
        tests = {}
        for name, r in reports.items():
            qids = sorted(r.per_query)
            a = [r.per_query[q] for q in qids]
            b = [other[name].per_query[q] for q in qids]
            t = paired_ttest(a, b, args.bonferroni)
            tests[name] = {"t": t.t, "p_raw": t.p_raw, "p_bonferroni": t.p_bonferroni,
                           "significant": t.significant, "degenerate_variance": t.degenerate_variance,
                           "compare_mean": other[name].mean}
        rows = [["metric", "mean", "queries", "compare", "p_bonf", "sig"]] + [
            [name, f"{r.mean:.4f}", str(len(r.per_query)), f"{tests[name]['compare_mean']:.4f}",
             f"{tests[name]['p_bonferroni']:.4g}", "*" if tests[name]["significant"] else ""]
            for name, r in reports.items()
        ]
        summary["ttest"] = tests
    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps({**summary, "per_query": {n: r.per_query for n, r in reports.items()}}, indent=1) + "\n",
            encoding="utf-8")
    if args.text_out:
        Path(args.text_out).write_text(_format_table(rows) + "\n", encoding="utf-8")
    return _emit(summary)


def cmd_sweep(args) -> int:
    if args.max_segs < 1:
        raise CommandError(f"--max-segs must be >= 1, got {args.max_segs}")
    names = [s for s in args.scorers.split(",") if s]
    unknown = [s for s in names if s not in SCORER_NAMES]
    if unknown:
        raise CommandError(f"unknown scorer(s) {unknown}; valid names: {', '.join(SCORER_NAMES)}")
    index = Index.load(args.index)
    params = _sdm_params(args)
    scorers = [get_scorer(n, params) for n in names]
    if any(s.needs_tokens for s in scorers) and not index.has_tokens:
        raise CommandError("exact-sdm needs an index built from segments with 'tokens'")
    queries = list(read_encoded_queries(args.queries))
    qrels = read_qrels(args.qrels)
    metrics = [m for m in args.metrics.split(",") if m]
    rows = run_sweep(index, queries, qrels, args.max_segs, scorers, metrics, k=args.k,
                     candidate_pool=args.candidate_pool, threads=args.threads)
    mirror = write_sweep(rows, Path(args.out))
    return _emit({"command": "sweep", "rows": len(rows), "out": args.out, "json": str(mirror)})


def cmd_baseline(args) -> int:
    docs = {}
    with open(args.corpus, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                obj = json.loads(line)
                docs[obj["doc_id"]] = obj["tokens"] if "tokens" in obj else obj["text"].lower().split()
    stats = baseline.CorpusStats.build(docs)
    params = baseline.ClassicSdmParams(args.lambda_t, args.lambda_o, args.lambda_u, window=args.window, mu=args.mu)
    run = []
    with open(args.queries, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            toks = obj["tokens"] if "tokens" in obj else obj["text"].lower().split()
            if args.model == "bm25":
                scores = {d: baseline.bm25_score(toks, d, stats, args.k1, args.b) for d in stats.docs}
            else:
                scores = {d: baseline.classic_sdm_score(toks, d, stats, params) for d in stats.docs}
            run.extend(rank_scores(obj["query_id"], scores, k=args.k, tag=args.model))
    write_run(args.run, run)
    return _emit({"command": "baseline", "model": args.model, "documents": stats.doc_count,
                  "entries": len(run), "run": args.run})


# ---------------------------------------------------------------- parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for any randomized step")
    common.add_argument("--threads", type=int, default=1, help="parallel queries")
    common.add_argument("--config", help="JSON file of flag defaults")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lsrlong", description="Long-document learned sparse retrieval.")
    sub = parser.add_subparsers(dest="command", required=True)
    leaves = {}

    p = sub.add_parser("segment", parents=[common], help="split JSONL documents into segments")
    p.add_argument("--input", required=True, help='JSONL of {"doc_id", "text"}')
    p.add_argument("--out", required=True)
    p.add_argument("--max-tokens", type=int, default=400)
    p.set_defaults(func=cmd_segment)
    leaves[("segment",)] = p

    p = sub.add_parser("synth", parents=[common], help="generate synthetic data")
    p.add_argument("kind", choices=["corpus", "proximity", "adversarial"])
    p.add_argument("--out", required=True, help="file for corpus, directory otherwise")
    p.add_argument("--num-docs", type=int, default=20)
    p.add_argument("--segs", type=int, default=5)
    p.add_argument("--vocab", type=int, default=100)
    p.add_argument("--entries", type=int, default=12)
    p.add_argument("--num-queries", type=int, default=20)
    p.add_argument("--queries-out")
    p.set_defaults(func=cmd_synth)
    leaves[("synth",)] = p

    p = sub.add_parser("index", help="build or search an index")
    isub = p.add_subparsers(dest="action", required=True)
    b = isub.add_parser("build", parents=[common])
    b.add_argument("--segments", required=True)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_index_build)
    leaves[("index", "build")] = b
    s = isub.add_parser("search", parents=[common])
    s.add_argument("--index", required=True)
    s.add_argument("--queries", required=True)
    s.add_argument("--k", type=int, default=1000)
    s.add_argument("--candidate-pool", type=int, default=DEFAULT_CANDIDATE_POOL)
    s.add_argument("--run", required=True)
    s.add_argument("--tag", default="lsrlong")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--agg", choices=["rep-max", "score-max", "sum", "mean"])
    mode.add_argument("--sdm", choices=["exact", "soft"])
    s.add_argument("--lambdas-from", help="tune report to take lambda weights from")
    _add_sdm_flags(s)
    s.set_defaults(func=cmd_index_search)
    leaves[("index", "search")] = s

    p = sub.add_parser("tune", parents=[common], help="grid-search SDM weights on triplets")
    p.add_argument("--triplets", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--sdm", choices=["exact", "soft"], default="exact")
    p.add_argument("--grid-step", type=float, default=0.05)
    p.add_argument("--out", required=True)
    _add_sdm_flags(p)
    p.set_defaults(func=cmd_tune)
    leaves[("tune",)] = p

    p = sub.add_parser("eval", parents=[common], help="evaluate a run against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--metrics", default="mrr@10,ndcg@10,recall@1000")
    p.add_argument("--compare", help="second run for a paired t-test")
    p.add_argument("--bonferroni", type=int, default=1, help="number of comparisons")
    p.add_argument("--json-out", help="full report with per-query values")
    p.add_argument("--text-out", help="aligned-column table")
    p.set_defaults(func=cmd_eval)
    leaves[("eval",)] = p

    p = sub.add_parser("sweep", parents=[common], help="metric vs. number of segments kept")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--max-segs", type=int, default=5)
    p.add_argument("--scorers", default=",".join(SCORER_NAMES))
    p.add_argument("--metrics", default="mrr@10")
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--candidate-pool", type=int, default=DEFAULT_CANDIDATE_POOL)
    p.add_argument("--lambdas-from", help="tune report to take lambda weights from")
    p.add_argument("--out", required=True, help="CSV path; a JSON mirror is written alongside")
    _add_sdm_flags(p)
    p.set_defaults(func=cmd_sweep)
    leaves[("sweep",)] = p

    p = sub.add_parser("baseline", parents=[common], help="BM25 or classic SDM over a token corpus")
    p.add_argument("--corpus", required=True, help='JSONL of {"doc_id", "tokens"} or {"doc_id", "text"}')
    p.add_argument("--queries", required=True, help='JSONL of {"query_id", "tokens"} or {"query_id", "text"}')
    p.add_argument("--model", choices=["bm25", "sdm"], default="bm25")
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--k1", type=float, default=0.9)
    p.add_argument("--b", type=float, default=0.4)
    p.add_argument("--mu", type=float, default=baseline.DEFAULT_MU)
    p.add_argument("--run", required=True)
    _add_sdm_flags(p)
    p.set_defaults(func=cmd_baseline)
    leaves[("baseline",)] = p

    return parser, leaves


def _apply_config(parser, leaves, args, argv):
    config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if not isinstance(config, dict):
        raise CommandError(f"{args.config}: config must be a JSON object")
    key = (args.command, args.action) if args.command == "index" else (args.command,)
    leaf = leaves[key]
    known = {a.dest for a in leaf._actions}
    unknown = [k for k in config if k.replace("-", "_") not in known]
    if unknown:
        raise CommandError(f"{args.config}: unknown keys {unknown}")
    leaf.set_defaults(**{k.replace("-", "_"): v for k, v in config.items()})
    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, leaves = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.config:
            args = _apply_config(parser, leaves, args, argv)
        _seed(args)
        return args.func(args)
    except (CommandError, ValidationError, ValueError, KeyError, FileNotFoundError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        sys.stderr.write(f"lsrlong {args.command}: error: {msg}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
