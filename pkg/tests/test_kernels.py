"""Parity between the compiled kernels and the pure-Python fallback,
plus correctness of the matcher against a DP LCS oracle."""

from __future__ import annotations

import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revhist._kernels import _fallback
from revhist._kernels import IMPLEMENTATION, match_blocks, tokenize
from oracles import lcs_length_dp


def test_compiled_kernel_is_active():
    # the build in this repo compiles the extension; the fallback is
    # exercised through _fallback directly and via REVHIST_PURE=1
    assert IMPLEMENTATION in ("c", "python")


@given(st.text(max_size=300))
@settings(max_examples=300, deadline=None)
def test_tokenize_parity(text):
    assert tokenize(text) == _fallback.tokenize(text)


@given(st.text(max_size=200))
@settings(max_examples=200, deadline=None)
def test_tokenize_matches_regex_spec(text):
    assert _fallback.tokenize(text) == re.findall(r"\w+", text.casefold())


def test_tokenize_basics():
    assert tokenize("Hello, WORLD!") == ["hello", "world"]
    assert tokenize("") == []
    assert tokenize("a_b c-d 1.5") == ["a_b", "c", "d", "1", "5"]
    assert tokenize("Straße") == ["strasse"]  # casefold, not lower


ids = st.lists(st.integers(min_value=0, max_value=8), max_size=40)


@given(ids, ids)
@settings(max_examples=300, deadline=None)
def test_match_blocks_parity(a, b):
    assert match_blocks(a, b, len(a) + len(b)) == _fallback.match_blocks(
        a, b, len(a) + len(b)
    )


@given(ids, ids)
@settings(max_examples=300, deadline=None)
def test_match_blocks_is_maximal_common_subsequence(a, b):
    blocks = match_blocks(a, b, len(a) + len(b))
    assert blocks is not None
    # blocks form a strictly advancing common subsequence
    prev_a = prev_b = 0
    total = 0
    for i, j, size in blocks:
        assert size > 0
        assert i >= prev_a and j >= prev_b
        assert a[i : i + size] == b[j : j + size]
        prev_a, prev_b = i + size, j + size
        total += size
    # and it is maximal: the DP oracle agrees on the length
    assert total == lcs_length_dp(a, b)


def test_match_blocks_budget_exhaustion_returns_none():
    a = [1] * 20
    b = [2] * 20
    assert match_blocks(a, b, 4) is None
    assert _fallback.match_blocks(a, b, 4) is None


def test_match_blocks_empty_sides():
    assert match_blocks([], [], 0) == []
    assert match_blocks([], [1, 2], 4) == []
    assert match_blocks([1, 2], [], 4) == []


@pytest.mark.parametrize("impl", [match_blocks, _fallback.match_blocks])
def test_match_blocks_identity(impl):
    seq = list(range(50))
    assert impl(seq, seq, 100) == [(0, 0, 50)]
