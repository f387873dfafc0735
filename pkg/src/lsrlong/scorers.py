"""Named document scorers used by retrieval, tuning and the sweep."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from lsrlong.aggregate import AggregationStrategy, aggregate_score
from lsrlong.core import EXACT, SOFT, DocumentRep, QueryRep, SdmParams
from lsrlong.sdm import sdm_score

SDM_NAMES = {"exact-sdm": EXACT, "soft-sdm": SOFT}
SCORER_NAMES = tuple(s.value for s in AggregationStrategy) + tuple(SDM_NAMES)


class UnknownScorerError(ValueError):
    pass


@dataclass(frozen=True)
class Scorer:
    name: str
    params: Optional[SdmParams] = None

    @property
    def is_sdm(self) -> bool:
        return self.params is not None

    @property
    def needs_tokens(self) -> bool:
        return self.params is not None and self.params.mode == EXACT

    def __call__(self, q: QueryRep, d: DocumentRep) -> float:
        if self.params is not None:
            return sdm_score(q, d, self.params)
        return aggregate_score(self.name, q, d)


def get_scorer(name: str, params: Optional[SdmParams] = None) -> Scorer:
    """Scorer by name; SDM names take their mode from the name, the rest from ``params``."""
    if name in SDM_NAMES:
        base = params if params is not None else SdmParams()
        return Scorer(name, replace(base, mode=SDM_NAMES[name]))
    if name in SCORER_NAMES:
        return Scorer(name)
    raise UnknownScorerError(f"unknown scorer {name!r}; valid names: {', '.join(SCORER_NAMES)}")
