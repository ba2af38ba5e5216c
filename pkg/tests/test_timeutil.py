from __future__ import annotations

from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revhist.errors import BadRangeError, BadTimestampError
from revhist.timeutil import (
    SECONDS_PER_DAY,
    bucket_start,
    bucket_starts,
    day_start,
    format_date,
    format_timestamp,
    parse_date,
    parse_timestamp,
    week_start,
)
from oracles import bucket_start_dt

ts_range = st.integers(min_value=0, max_value=4102444800)  # 1970..2100


def test_parse_format_examples():
    assert parse_timestamp("2011-01-01T00:00:00Z") == 1293840000
    assert format_timestamp(1293840000) == "2011-01-01T00:00:00Z"
    assert parse_date("2011-01-01") == 1293840000
    assert format_date(1293840000 + 3600) == "2011-01-01"


@given(ts_range)
@settings(max_examples=200, deadline=None)
def test_timestamp_round_trip(ts):
    assert parse_timestamp(format_timestamp(ts)) == ts


@pytest.mark.parametrize(
    "bad", ["2011-01-01", "2011-01-01 00:00:00Z", "2011-13-01T00:00:00Z",
            "2011-01-01T00:00:00", "garbage", "2011-01-01T00:00:00+00:00"]
)
def test_bad_timestamps_rejected(bad):
    with pytest.raises(BadTimestampError):
        parse_timestamp(bad)


@given(ts_range)
@settings(max_examples=300, deadline=None)
def test_bucket_alignment_matches_datetime_oracle(ts):
    assert day_start(ts) == bucket_start_dt(ts, "day")
    assert week_start(ts) == bucket_start_dt(ts, "week")


def test_week_starts_on_monday():
    # 2012-11-06 was a Tuesday; its ISO week began Monday 2012-11-05
    ts = parse_timestamp("2012-11-06T10:00:00Z")
    assert format_date(week_start(ts)) == "2012-11-05"
    monday = datetime.fromtimestamp(week_start(ts), tz=timezone.utc)
    assert monday.isoweekday() == 1


def test_bucket_starts_contiguous_and_aligned():
    lo = parse_date("2012-01-04")  # a Wednesday
    hi = parse_date("2012-02-01")
    days = bucket_starts(lo, hi, "day")
    assert days[0] == lo and days[-1] < hi
    assert all(b - a == SECONDS_PER_DAY for a, b in zip(days, days[1:]))
    weeks = bucket_starts(lo, hi, "week")
    assert weeks[0] == week_start(lo) <= lo
    assert all(bucket_start(w, "week") == w for w in weeks)


def test_empty_range_rejected():
    with pytest.raises(BadRangeError):
        bucket_starts(100, 100, "day")
