"""Learned sparse retrieval for long documents: segment aggregation and
sequential dependence scoring over positional sparse representations."""

from lsrlong.core import (
    DocumentRep,
    QueryRep,
    SdmParams,
    SegmentRep,
    dot,
    max_pool,
    query_to_vector,
)

__version__ = "0.1.0"

__all__ = [
    "DocumentRep",
    "QueryRep",
    "SdmParams",
    "SegmentRep",
    "dot",
    "max_pool",
    "query_to_vector",
]
