"""Readers and writers for encoded segments, encoded queries, runs, qrels and triplets.

All readers stream line by line. Errors carry ``path:line`` so that a bad
record can be found without re-parsing the file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Union

from lsrlong.core import QueryRep, SegmentRep, ValidationError

PathLike = Union[str, Path]
Qrels = Dict[str, Dict[str, int]]


class FormatError(ValidationError):
    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = str(path)
        self.lineno = lineno


@dataclass(frozen=True)
class TripletRecord:
    query_id: str
    positive_doc_id: str
    negative_doc_id: str

    def __post_init__(self):
        if self.positive_doc_id == self.negative_doc_id:
            raise ValidationError(
                f"triplet for {self.query_id}: positive and negative are both {self.positive_doc_id!r}"
            )


@dataclass(frozen=True)
class QrelRecord:
    query_id: str
    doc_id: str
    relevance: int

    def __post_init__(self):
        if self.relevance < 0:
            raise ValidationError(f"negative relevance for ({self.query_id}, {self.doc_id})")


@dataclass(frozen=True)
class RunEntry:
    query_id: str
    doc_id: str
    rank: int
    score: float
    tag: str = "lsrlong"


RunList = List[RunEntry]


def _json_lines(path: PathLike) -> Iterator[tuple]:
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as e:
                raise FormatError(path, lineno, f"malformed JSON: {e.msg}") from None


def _require(obj, key, kind, path, lineno):
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError(path, lineno, f"missing field {key!r}")
    value = obj[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise FormatError(path, lineno, f"field {key!r} must be an integer")
    if kind is str and not isinstance(value, str):
        raise FormatError(path, lineno, f"field {key!r} must be a string")
    if kind is list and not isinstance(value, list):
        raise FormatError(path, lineno, f"field {key!r} must be an array")
    return value


# ---------------------------------------------------------------- segments

def segment_from_json(obj: dict, path: PathLike = "<memory>", lineno: int = 0) -> SegmentRep:
    doc_id = _require(obj, "doc_id", str, path, lineno)
    seg = _require(obj, "seg", int, path, lineno)
    length = _require(obj, "len", int, path, lineno)
    raw = _require(obj, "entries", list, path, lineno)
    tokens = obj.get("tokens")
    try:
        entries = []
        for e in raw:
            if not isinstance(e, list) or len(e) != 3:
                raise ValidationError(f"entry {e!r} is not [position, term_id, weight]")
            entries.append((int(e[0]), int(e[1]), float(e[2])))
        if tokens is not None:
            if not isinstance(tokens, list):
                raise ValidationError("tokens must be an array of term ids")
            tokens = tuple(int(t) for t in tokens)
        return SegmentRep(doc_id, seg, length, tuple(entries), tokens)
    except (ValidationError, TypeError, ValueError) as e:
        raise FormatError(path, lineno, str(e)) from None


def segment_to_json(s: SegmentRep) -> dict:
    obj = {
        "doc_id": s.doc_id,
        "seg": s.seg_index,
        "len": s.length,
        "entries": [[p, t, w] for p, t, w in s.entries],
    }
    if s.tokens is not None:
        obj["tokens"] = list(s.tokens)
    return obj


def read_encoded_segments(path: PathLike) -> Iterator[SegmentRep]:
    for lineno, obj in _json_lines(path):
        yield segment_from_json(obj, path, lineno)


def write_encoded_segments(path: PathLike, segments: Iterable[SegmentRep]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        for s in segments:
            f.write(json.dumps(segment_to_json(s), separators=(",", ":")) + "\n")
            n += 1
    return n


# ---------------------------------------------------------------- queries

def read_encoded_queries(path: PathLike) -> Iterator[QueryRep]:
    for lineno, obj in _json_lines(path):
        qid = _require(obj, "query_id", str, path, lineno)
        raw = _require(obj, "terms", list, path, lineno)
        try:
            terms = []
            for pair in raw:
                if not isinstance(pair, list) or len(pair) != 2:
                    raise ValidationError(f"term {pair!r} is not [term_id, weight]")
                terms.append((int(pair[0]), float(pair[1])))
            yield QueryRep(qid, tuple(terms))
        except (ValidationError, TypeError, ValueError) as e:
            raise FormatError(path, lineno, str(e)) from None


def write_encoded_queries(path: PathLike, queries: Iterable[QueryRep]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        for q in queries:
            obj = {"query_id": q.query_id, "terms": [[t, w] for t, w in q.terms]}
            f.write(json.dumps(obj, separators=(",", ":")) + "\n")
            n += 1
    return n


# ---------------------------------------------------------------- runs

def rank_scores(
    query_id: str,
    scores: Mapping[str, float],
    k: Optional[int] = None,
    tag: str = "lsrlong",
) -> RunList:
    """Rank by descending score, ties by ascending doc_id."""
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    if k is not None:
        ordered = ordered[:k]
    return [RunEntry(query_id, d, i, float(s), tag) for i, (d, s) in enumerate(ordered, 1)]


def format_run_line(e: RunEntry) -> str:
    return f"{e.query_id} Q0 {e.doc_id} {e.rank} {e.score:.6f} {e.tag}\n"


def write_run(path: PathLike, run: Iterable[RunEntry]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for e in run:
            f.write(format_run_line(e))


def read_run(path: PathLike) -> RunList:
    run: RunList = []
    last: Dict[str, RunEntry] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            cols = line.split()
            if not cols:
                continue
            if len(cols) != 6:
                raise FormatError(path, lineno, f"expected 6 columns, got {len(cols)}")
            qid, _, doc_id, rank, score, tag = cols
            try:
                entry = RunEntry(qid, doc_id, int(rank), float(score), tag)
            except ValueError as e:
                raise FormatError(path, lineno, str(e)) from None
            prev = last.get(qid)
            expected = 1 if prev is None else prev.rank + 1
            if entry.rank != expected:
                raise FormatError(path, lineno, f"rank {entry.rank} for {qid}, expected {expected}")
            if prev is not None and entry.score > prev.score:
                raise FormatError(path, lineno, f"score increases at rank {entry.rank} for {qid}")
            last[qid] = entry
            run.append(entry)
    return run


def run_by_query(run: Iterable[RunEntry]) -> Dict[str, List[RunEntry]]:
    out: Dict[str, List[RunEntry]] = {}
    for e in run:
        out.setdefault(e.query_id, []).append(e)
    for entries in out.values():
        entries.sort(key=lambda e: e.rank)
    return out


# ---------------------------------------------------------------- qrels / triplets

def iter_qrels(path: PathLike) -> Iterator[QrelRecord]:
    seen = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            cols = line.split()
            if not cols:
                continue
            if len(cols) != 4:
                raise FormatError(path, lineno, f"expected 4 columns, got {len(cols)}")
            qid, _, doc_id, rel = cols
            try:
                rec = QrelRecord(qid, doc_id, int(rel))
            except (ValueError, ValidationError) as e:
                raise FormatError(path, lineno, str(e)) from None
            if (qid, doc_id) in seen:
                raise FormatError(path, lineno, f"duplicate judgment for ({qid}, {doc_id})")
            seen.add((qid, doc_id))
            yield rec


def read_qrels(path: PathLike) -> Qrels:
    qrels: Qrels = {}
    for rec in iter_qrels(path):
        qrels.setdefault(rec.query_id, {})[rec.doc_id] = rec.relevance
    return qrels


def write_qrels(path: PathLike, qrels: Mapping[str, Mapping[str, int]]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for qid, docs in qrels.items():
            for doc_id, rel in docs.items():
                f.write(f"{qid} 0 {doc_id} {rel}\n")


def read_triplets(path: PathLike) -> Iterator[TripletRecord]:
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise FormatError(path, lineno, f"expected 3 tab-separated columns, got {len(cols)}")
            try:
                yield TripletRecord(*cols)
            except ValidationError as e:
                raise FormatError(path, lineno, str(e)) from None


def write_triplets(path: PathLike, triplets: Iterable[TripletRecord]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in triplets:
            f.write(f"{t.query_id}\t{t.positive_doc_id}\t{t.negative_doc_id}\n")
