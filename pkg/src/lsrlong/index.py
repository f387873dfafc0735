"""Positional impact index with two-stage top-k retrieval.

Stage one walks the posting lists of the query terms document-at-a-time and
scores every matching document by representation max pooling. Stage two
rescores the best ``candidate_pool`` documents with the requested scorer from
the forward store, which keeps the positional data phrase and window matching
need.

On disk an index is a directory holding ``postings.bin``, ``forward.bin`` and
``manifest.json``. Binary arrays are little-endian, each file starts with a
magic tag and the format version.
"""

from __future__ import annotations

import heapq
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

import numpy as np

from lsrlong.core import DocumentRep, QueryRep, SegmentRep, ValidationError, query_to_vector
from lsrlong.ingest import RunEntry, RunList, rank_scores
from lsrlong.scorers import Scorer
from lsrlong.sdm import MissingTokensError

FORMAT_VERSION = 1
DEFAULT_CANDIDATE_POOL = 1000

POSTING_DTYPE = np.dtype([("doc", "<u4"), ("seg", "<u4"), ("pos", "<u4"), ("weight", "<f8")])
TERM_DTYPE = np.dtype([("term", "<i8"), ("offset", "<u8"), ("count", "<u8")])
SEGMENT_DTYPE = np.dtype([
    ("doc", "<u4"), ("seg", "<u4"), ("length", "<u4"), ("has_tokens", "<u1"),
    ("entry_offset", "<u8"), ("entry_count", "<u8"), ("token_offset", "<u8"),
])
ENTRY_DTYPE = np.dtype([("pos", "<u4"), ("term", "<i8"), ("weight", "<f8")])
TOKEN_DTYPE = np.dtype("<i8")

_POSTINGS_HEADER = struct.Struct("<4sIQQ")
_FORWARD_HEADER = struct.Struct("<4sIQQQ")


class IndexFormatError(ValidationError):
    pass


@dataclass
class Index:
    doc_ids: List[str]
    docs: List[DocumentRep]
    postings: Dict[int, np.ndarray]
    ordinals: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.ordinals:
            self.ordinals = {d: i for i, d in enumerate(self.doc_ids)}

    @property
    def num_docs(self) -> int:
        return len(self.doc_ids)

    @property
    def num_postings(self) -> int:
        return int(sum(len(p) for p in self.postings.values()))

    @property
    def has_tokens(self) -> bool:
        return all(d.has_tokens for d in self.docs)

    def document(self, doc_id: str) -> DocumentRep:
        try:
            return self.docs[self.ordinals[doc_id]]
        except KeyError:
            raise KeyError(f"document {doc_id!r} not in index") from None

    def segments(self) -> Iterable[SegmentRep]:
        for d in self.docs:
            yield from d.segments

    def truncated(self, num_segments: int) -> "Index":
        """Index over the first ``num_segments`` segments of every document."""
        return build_index(s for d in self.docs for s in d.segments[:num_segments])

    # ------------------------------------------------------------ retrieval

    def candidates(self, q: QueryRep, pool: int) -> Dict[int, float]:
        """Document-at-a-time representation max pooling over the query's posting lists."""
        qvec = query_to_vector(q)
        cursors = []
        for term, qw in sorted(qvec.items()):
            plist = self.postings.get(term)
            if plist is None or len(plist) == 0:
                continue
            docs = plist["doc"]
            starts = np.flatnonzero(np.r_[True, docs[1:] != docs[:-1]])
            block_max = np.maximum.reduceat(plist["weight"], starts)
            cursors.append((docs[starts], block_max, qw))

        heap = [(int(c[0][0]), slot, 0) for slot, c in enumerate(cursors)]
        heapq.heapify(heap)
        scores: Dict[int, float] = {}
        while heap:
            doc = heap[0][0]
            score = 0.0
            while heap and heap[0][0] == doc:
                _, slot, i = heapq.heappop(heap)
                docs, block_max, qw = cursors[slot]
                score += qw * float(block_max[i])
                if i + 1 < len(docs):
                    heapq.heappush(heap, (int(docs[i + 1]), slot, i + 1))
            scores[doc] = score
        if len(scores) > pool:
            top = heapq.nsmallest(pool, scores.items(), key=lambda kv: (-kv[1], self.doc_ids[kv[0]]))
            scores = dict(top)
        return scores

    def retrieve(
        self,
        q: QueryRep,
        k: int,
        scorer: Scorer,
        candidate_pool: int = DEFAULT_CANDIDATE_POOL,
        tag: str = "lsrlong",
    ) -> RunList:
        if k <= 0:
            raise ValueError(f"k must be positive, got {k}")
        if candidate_pool < k:
            raise ValueError(f"candidate_pool ({candidate_pool}) must be >= k ({k})")
        if scorer.needs_tokens and not self.has_tokens:
            raise MissingTokensError(
                "exact SDM needs token sequences but this index was built from segments "
                "without 'tokens'; rebuild with tokens or use --sdm soft"
            )
        stage1 = self.candidates(q, candidate_pool)
        final = {self.doc_ids[o]: scorer(q, self.docs[o]) for o in stage1}
        return rank_scores(q.query_id, final, k=k, tag=tag)

    # ------------------------------------------------------------ persistence

    def save(self, directory: Union[str, Path]) -> Path:
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)

        terms = sorted(self.postings)
        term_table = np.zeros(len(terms), dtype=TERM_DTYPE)
        offset = 0
        for i, t in enumerate(terms):
            n = len(self.postings[t])
            term_table[i] = (t, offset, n)
            offset += n
        all_postings = (
            np.concatenate([self.postings[t] for t in terms]).astype(POSTING_DTYPE)
            if terms else np.zeros(0, dtype=POSTING_DTYPE)
        )
        with open(out / "postings.bin", "wb") as f:
            f.write(_POSTINGS_HEADER.pack(b"LSRP", FORMAT_VERSION, len(terms), len(all_postings)))
            f.write(term_table.tobytes())
            f.write(all_postings.tobytes())

        seg_rows, entries, tokens = [], [], []
        n_entries = n_tokens = 0
        for ordinal, d in enumerate(self.docs):
            for s in d.segments:
                seg_rows.append((ordinal, s.seg_index, s.length, int(s.has_tokens),
                                 n_entries, len(s.entries), n_tokens))
                entries.extend(s.entries)
                n_entries += len(s.entries)
                if s.tokens is not None:
                    tokens.extend(s.tokens)
                    n_tokens += len(s.tokens)
        seg_table = np.array(seg_rows, dtype=SEGMENT_DTYPE)
        entry_table = np.array(entries, dtype=ENTRY_DTYPE)
        token_table = np.array(tokens, dtype=TOKEN_DTYPE)
        with open(out / "forward.bin", "wb") as f:
            f.write(_FORWARD_HEADER.pack(b"LSRF", FORMAT_VERSION, len(seg_table), len(entry_table), len(token_table)))
            f.write(seg_table.tobytes())
            f.write(entry_table.tobytes())
            f.write(token_table.tobytes())

        manifest = {
            "format_version": FORMAT_VERSION,
            "byte_order": "little",
            "num_docs": self.num_docs,
            "num_segments": len(seg_table),
            "num_entries": len(entry_table),
            "num_terms": len(terms),
            "num_postings": len(all_postings),
            "has_tokens": self.has_tokens,
            "doc_ids": self.doc_ids,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
        return out

    @classmethod
    def load(cls, directory: Union[str, Path]) -> "Index":
        src = Path(directory)
        manifest = json.loads((src / "manifest.json").read_text(encoding="utf-8"))
        if manifest.get("format_version") != FORMAT_VERSION:
            raise IndexFormatError(f"{src}: unsupported index format {manifest.get('format_version')}")
        doc_ids = list(manifest["doc_ids"])

        raw = (src / "postings.bin").read_bytes()
        magic, version, n_terms, n_postings = _POSTINGS_HEADER.unpack_from(raw)
        if magic != b"LSRP" or version != FORMAT_VERSION:
            raise IndexFormatError(f"{src / 'postings.bin'}: bad header")
        at = _POSTINGS_HEADER.size
        term_table = np.frombuffer(raw, TERM_DTYPE, n_terms, at)
        at += term_table.nbytes
        all_postings = np.frombuffer(raw, POSTING_DTYPE, n_postings, at)
        postings = {
            int(t["term"]): all_postings[int(t["offset"]):int(t["offset"]) + int(t["count"])].copy()
            for t in term_table
        }

        raw = (src / "forward.bin").read_bytes()
        magic, version, n_segs, n_entries, n_tokens = _FORWARD_HEADER.unpack_from(raw)
        if magic != b"LSRF" or version != FORMAT_VERSION:
            raise IndexFormatError(f"{src / 'forward.bin'}: bad header")
        at = _FORWARD_HEADER.size
        seg_table = np.frombuffer(raw, SEGMENT_DTYPE, n_segs, at)
        at += seg_table.nbytes
        entry_table = np.frombuffer(raw, ENTRY_DTYPE, n_entries, at)
        at += entry_table.nbytes
        token_table = np.frombuffer(raw, TOKEN_DTYPE, n_tokens, at)

        per_doc: List[List[SegmentRep]] = [[] for _ in doc_ids]
        for row in seg_table:
            lo, n = int(row["entry_offset"]), int(row["entry_count"])
            ents = entry_table[lo:lo + n]
            entries = tuple(zip(ents["pos"].tolist(), ents["term"].tolist(), ents["weight"].tolist()))
            length = int(row["length"])
            tokens = None
            if row["has_tokens"]:
                t0 = int(row["token_offset"])
                tokens = tuple(token_table[t0:t0 + length].tolist())
            doc = int(row["doc"])
            per_doc[doc].append(SegmentRep(doc_ids[doc], int(row["seg"]), length, entries, tokens))
        docs = [DocumentRep(d, tuple(segs)) for d, segs in zip(doc_ids, per_doc)]
        return cls(doc_ids, docs, postings)


def build_index(segments: Iterable[SegmentRep]) -> Index:
    doc_ids: List[str] = []
    grouped: List[List[SegmentRep]] = []
    finished = set()
    for s in segments:
        if not grouped or doc_ids[-1] != s.doc_id:
            if s.doc_id in finished:
                raise IndexFormatError(f"segments of document {s.doc_id!r} are not contiguous in the stream")
            if doc_ids:
                finished.add(doc_ids[-1])
            doc_ids.append(s.doc_id)
            grouped.append([])
        current = grouped[-1]
        if any(prev.seg_index == s.seg_index for prev in current):
            raise IndexFormatError(f"duplicate segment ({s.doc_id!r}, {s.seg_index})")
        current.append(s)
    docs = [DocumentRep(d, tuple(segs)) for d, segs in zip(doc_ids, grouped)]

    rows: Dict[int, list] = {}
    for ordinal, d in enumerate(docs):
        for s in d.segments:
            for p, t, w in s.entries:
                rows.setdefault(t, []).append((ordinal, s.seg_index, p, w))
    # rows are produced in (doc, seg, position) order already
    postings = {t: np.array(r, dtype=POSTING_DTYPE) for t, r in rows.items()}
    return Index(doc_ids, docs, postings)


def retrieve(index: Index, q: QueryRep, k: int, scorer: Scorer,
             candidate_pool: int = DEFAULT_CANDIDATE_POOL) -> List[RunEntry]:
    return index.retrieve(q, k, scorer, candidate_pool)
