"""Embedded incremental temporal inverted index."""

from .engine import (
    FIELDS,
    CoOccurrence,
    IndexSegment,
    IndexStats,
    TemporalIndex,
    TermRanking,
    TimelineHistogram,
)
from .storage import FORMAT_VERSION, SegmentMeta

__all__ = [
    "FIELDS",
    "FORMAT_VERSION",
    "CoOccurrence",
    "IndexSegment",
    "IndexStats",
    "SegmentMeta",
    "TemporalIndex",
    "TermRanking",
    "TimelineHistogram",
]
