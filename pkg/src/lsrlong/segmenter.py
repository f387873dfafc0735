"""Sentence splitting and greedy packing of sentences into token-budgeted segments."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, List

# a sentence ends at . ! or ? followed by whitespace or end of text
_SENTENCE_END = re.compile(r"(?<=[.!?])(?:\s+|$)")


def whitespace_count(text: str) -> int:
    return len(text.split())


@dataclass(frozen=True)
class SegmenterConfig:
    max_tokens: int = 400
    tokenizer: Callable[[str], int] = whitespace_count

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be >= 1, got {self.max_tokens}")


def split_sentences(text: str) -> List[str]:
    pieces = _SENTENCE_END.split(text)
    return [" ".join(p.split()) for p in pieces if p.strip()]


def group_segments(sentences: List[str], cfg: SegmenterConfig = SegmenterConfig()) -> List[str]:
    """Pack sentences left to right; a sentence longer than the budget stands alone."""
    segments: List[List[str]] = []
    used = 0
    for sent in sentences:
        n = cfg.tokenizer(sent)
        if segments and used + n <= cfg.max_tokens:
            segments[-1].append(sent)
            used += n
        else:
            segments.append([sent])
            used = n
    return [" ".join(seg) for seg in segments]


def segment_text(text: str, cfg: SegmenterConfig = SegmenterConfig()) -> List[str]:
    return group_segments(split_sentences(text), cfg)
