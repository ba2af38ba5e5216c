"""UTC timestamp handling.

Timestamps are plain integers (seconds since the Unix epoch) everywhere
inside the toolkit; ISO-8601 text appears only at the edges (dump XML,
JSON payloads, CLI flags). Week buckets are ISO weeks: they start on
Monday and are labeled by the Monday date.
"""

from __future__ import annotations

import re
from datetime import datetime, timezone

from .errors import BadRangeError, BadTimestampError

SECONDS_PER_DAY = 86400
SECONDS_PER_WEEK = 7 * SECONDS_PER_DAY

# 1970-01-01 was a Thursday; shift so day 0 of the week grid is a Monday.
_EPOCH_WEEKDAY = 3

_TIMESTAMP_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$")
_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


def parse_timestamp(text: str) -> int:
    """Parse ``YYYY-MM-DDTHH:MM:SSZ`` into epoch seconds."""
    if not _TIMESTAMP_RE.match(text):
        raise BadTimestampError(f"not an ISO-8601 UTC timestamp: {text!r}")
    try:
        dt = datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ")
    except ValueError as exc:
        raise BadTimestampError(f"invalid timestamp {text!r}: {exc}") from None
    return int(dt.replace(tzinfo=timezone.utc).timestamp())


def format_timestamp(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_date(text: str) -> int:
    """Parse ``YYYY-MM-DD`` into epoch seconds at UTC midnight."""
    if not _DATE_RE.match(text):
        raise BadTimestampError(f"not a YYYY-MM-DD date: {text!r}")
    try:
        dt = datetime.strptime(text, "%Y-%m-%d")
    except ValueError as exc:
        raise BadTimestampError(f"invalid date {text!r}: {exc}") from None
    return int(dt.replace(tzinfo=timezone.utc).timestamp())


def format_date(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%d")


def day_start(ts: int) -> int:
    return (ts // SECONDS_PER_DAY) * SECONDS_PER_DAY


def week_start(ts: int) -> int:
    """Midnight of the ISO week's Monday containing ``ts``."""
    day = ts // SECONDS_PER_DAY
    return (day - (day + _EPOCH_WEEKDAY) % 7) * SECONDS_PER_DAY


def bucket_start(ts: int, granularity: str) -> int:
    if granularity == "day":
        return day_start(ts)
    if granularity == "week":
        return week_start(ts)
    raise ValueError(f"unknown granularity {granularity!r}")


def bucket_width(granularity: str) -> int:
    if granularity == "day":
        return SECONDS_PER_DAY
    if granularity == "week":
        return SECONDS_PER_WEEK
    raise ValueError(f"unknown granularity {granularity!r}")


def bucket_starts(start_ts: int, end_ts: int, granularity: str) -> list[int]:
    """Contiguous bucket starts covering [start_ts, end_ts).

    The first bucket is aligned down to the granularity, so it may begin
    before ``start_ts``; callers only count postings inside the range.
    """
    if start_ts >= end_ts:
        raise BadRangeError(f"empty range [{start_ts}, {end_ts})")
    width = bucket_width(granularity)
    first = bucket_start(start_ts, granularity)
    return list(range(first, end_ts, width))
