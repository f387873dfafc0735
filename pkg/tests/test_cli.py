import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from lsrlong.cli import main

GOLDEN = Path(__file__).parent / "fixtures" / "golden"


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def golden(tmp_path):
    for f in GOLDEN.iterdir():
        shutil.copy(f, tmp_path / f.name)
    return tmp_path


def build(capsys, root, segments="segments.jsonl"):
    code, out, _ = run_cli(capsys, "index", "build", "--segments", root / segments, "--out", root / "idx")
    assert code == 0
    return json.loads(out)


def test_help_exits_zero():
    proc = subprocess.run([sys.executable, "-m", "lsrlong.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "usage" in proc.stdout
    with pytest.raises(SystemExit) as e:
        main(["sweep", "--help"])
    assert e.value.code == 0


def test_golden_search_and_eval(golden, capsys):
    summary = build(capsys, golden)
    assert summary["documents"] == 3 and summary["has_tokens"]
    code, _, _ = run_cli(capsys, "index", "search", "--index", golden / "idx", "--queries", golden / "queries.jsonl",
                         "--agg", "score-max", "--k", 10, "--run", golden / "run.txt")
    assert code == 0
    assert (golden / "run.txt").read_text() == (GOLDEN / "expected_run.txt").read_text()

    code, out, _ = run_cli(capsys, "eval", "--run", golden / "run.txt", "--qrels", golden / "qrels.txt",
                           "--text-out", golden / "table.txt", "--json-out", golden / "full.json")
    assert code == 0
    expected = json.loads((GOLDEN / "expected_metrics.json").read_text())
    got = json.loads(out)["metrics"]
    assert got.keys() == expected.keys()
    for name, value in expected.items():
        assert got[name] == pytest.approx(value, abs=1e-9)
    assert (golden / "table.txt").read_text().startswith("metric")
    assert json.loads((golden / "full.json").read_text())["per_query"]["mrr@10"] == {"q1": 0.5, "q2": 1.0}


def test_eval_compare(golden, capsys):
    build(capsys, golden)
    for agg in ("score-max", "sum"):
        run_cli(capsys, "index", "search", "--index", golden / "idx", "--queries", golden / "queries.jsonl",
                "--agg", agg, "--run", golden / f"{agg}.txt")
    code, out, _ = run_cli(capsys, "eval", "--run", golden / "sum.txt", "--compare", golden / "score-max.txt",
                           "--qrels", golden / "qrels.txt", "--bonferroni", 2)
    assert code == 0
    assert set(json.loads(out)["ttest"]["mrr@10"]) >= {"t", "p_raw", "p_bonferroni", "significant"}


def test_exact_sdm_needs_tokens(golden, capsys):
    lines = [json.loads(l) for l in (golden / "segments.jsonl").read_text().splitlines()]
    for obj in lines:
        obj.pop("tokens")
    (golden / "bare.jsonl").write_text("".join(json.dumps(o) + "\n" for o in lines))
    build(capsys, golden, "bare.jsonl")
    code, out, err = run_cli(capsys, "index", "search", "--index", golden / "idx", "--queries",
                             golden / "queries.jsonl", "--sdm", "exact", "--run", golden / "run.txt")
    assert code != 0 and out == ""
    assert "tokens" in err and "soft" in err
    code, _, _ = run_cli(capsys, "index", "search", "--index", golden / "idx", "--queries",
                         golden / "queries.jsonl", "--sdm", "soft", "--run", golden / "run.txt")
    assert code == 0


def test_sweep_errors(golden, capsys):
    build(capsys, golden)
    base = ["sweep", "--index", golden / "idx", "--queries", golden / "queries.jsonl",
            "--qrels", golden / "qrels.txt", "--out", golden / "sweep.csv"]
    code, _, err = run_cli(capsys, *base, "--scorers", "sum,median")
    assert code != 0 and "median" in err and "score-max" in err
    code, _, err = run_cli(capsys, *base, "--max-segs", 0)
    assert code != 0 and "max-segs" in err


def test_single_segment_sweep_aggregations_agree(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "synth", "corpus", "--out", tmp_path / "c.jsonl", "--num-docs", 30, "--vocab", 40,
                         "--queries-out", tmp_path / "q.jsonl", "--num-queries", 15, "--seed", 3)
    assert code == 0
    qs = [json.loads(l)["query_id"] for l in (tmp_path / "q.jsonl").read_text().splitlines()]
    (tmp_path / "qrels.txt").write_text("".join(f"{q} 0 d{i % 30:02d} 1\n" for i, q in enumerate(qs)))
    build(capsys, tmp_path, "c.jsonl")
    code, _, _ = run_cli(capsys, "sweep", "--index", tmp_path / "idx", "--queries", tmp_path / "q.jsonl",
                         "--qrels", tmp_path / "qrels.txt", "--max-segs", 1, "--scorers", "rep-max,score-max,sum,mean",
                         "--metrics", "mrr@10,ndcg@10", "--out", tmp_path / "sweep.csv")
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "sweep.csv")))
    assert len(rows) == 8
    for metric in ("mrr@10", "ndcg@10"):
        assert len({r["value"] for r in rows if r["metric"] == metric}) == 1
    assert len(json.loads((tmp_path / "sweep.json").read_text())) == 8


def test_config_precedence(golden, capsys):
    build(capsys, golden)
    (golden / "cfg.json").write_text(json.dumps({"k": 1, "agg": "sum"}))
    args = ["index", "search", "--index", golden / "idx", "--queries", golden / "queries.jsonl",
            "--config", golden / "cfg.json", "--run", golden / "run.txt"]
    assert run_cli(capsys, *args)[0] == 0
    assert len((golden / "run.txt").read_text().splitlines()) == 2
    assert run_cli(capsys, *args, "--k", 5)[0] == 0
    assert len((golden / "run.txt").read_text().splitlines()) == 4
    (golden / "bad.json").write_text(json.dumps({"nonsense": 1}))
    code, _, err = run_cli(capsys, "index", "search", "--index", golden / "idx", "--queries", golden / "queries.jsonl",
                           "--config", golden / "bad.json", "--run", golden / "run.txt")
    assert code == 1 and "nonsense" in err


def test_reruns_are_byte_identical(tmp_path, capsys):
    outputs = []
    for rep in range(2):
        d = tmp_path / str(rep)
        assert run_cli(capsys, "synth", "adversarial", "--out", d, "--num-queries", 6, "--segs", 3, "--seed", 4)[0] == 0
        build(capsys, d)
        assert run_cli(capsys, "tune", "--index", d / "idx", "--queries", d / "queries.jsonl",
                       "--triplets", d / "triplets.tsv", "--grid-step", 0.25, "--out", d / "tune.json")[0] == 0
        assert run_cli(capsys, "index", "search", "--index", d / "idx", "--queries", d / "queries.jsonl",
                       "--sdm", "exact", "--lambdas-from", d / "tune.json", "--run", d / "run.txt",
                       "--threads", 3)[0] == 0
        outputs.append([(d / f).read_bytes() for f in ("segments.jsonl", "idx/postings.bin", "idx/forward.bin",
                                                       "tune.json", "run.txt")])
    assert outputs[0] == outputs[1]


def test_segment_and_baseline(tmp_path, capsys):
    (tmp_path / "docs.jsonl").write_text(
        json.dumps({"doc_id": "a", "text": "One two three. Four five. Six."}) + "\n"
        + json.dumps({"doc_id": "b", "text": "seven eight"}) + "\n")
    code, out, _ = run_cli(capsys, "segment", "--input", tmp_path / "docs.jsonl", "--out", tmp_path / "segs.jsonl",
                           "--max-tokens", 3)
    assert code == 0 and json.loads(out)["segments"] == 3
    (tmp_path / "q.jsonl").write_text(json.dumps({"query_id": "q", "text": "four two"}) + "\n")
    for model in ("bm25", "sdm"):
        code, _, _ = run_cli(capsys, "baseline", "--corpus", tmp_path / "docs.jsonl", "--queries", tmp_path / "q.jsonl",
                             "--model", model, "--mu", 10, "--run", tmp_path / f"{model}.txt")
        assert code == 0
        assert (tmp_path / f"{model}.txt").read_text().splitlines()[0].split()[2] == "a"


def test_missing_file_is_an_error(tmp_path, capsys):
    code, out, err = run_cli(capsys, "index", "build", "--segments", tmp_path / "nope.jsonl", "--out", tmp_path / "i")
    assert code == 1 and out == "" and "error" in err
