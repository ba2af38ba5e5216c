"""Token-level deltas between a revision and its parent.

The delta contract is multiset-based: parent − removed + inserted equals
the child token multiset, and unchanged_count is the size of the
multiset intersection. Within the work budget, removed and inserted are
derived from a shortest-edit-script alignment (positionally faithful:
moved text shows up as a remove plus an insert); past the budget or the
token cap they fall back to plain multiset differences.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from ._kernels import match_blocks, tokenize

# Alignment is attempted only below this many tokens per side.
LCS_TOKEN_LIMIT = 50_000
# Work cap: (n + m) * max_edits stays near this many inner steps.
CELL_BUDGET = 2_000_000


@dataclass(frozen=True)
class RevisionDelta:
    revision_id: int
    parent_id: int | None
    inserted_terms: dict[str, int]
    removed_terms: dict[str, int]
    unchanged_count: int

    def to_payload(self) -> dict:
        return {
            "parent_id": self.parent_id,
            "inserted": dict(sorted(self.inserted_terms.items())),
            "removed": dict(sorted(self.removed_terms.items())),
            "unchanged": self.unchanged_count,
        }


def _edit_budget(n: int, m: int) -> int:
    total = n + m
    if total == 0:
        return 0
    return min(total, max(16, CELL_BUDGET // total))


def _trim(a: list[str], b: list[str]) -> tuple[int, int]:
    """Lengths of the common prefix and suffix (non-overlapping)."""
    n, m = len(a), len(b)
    pre = 0
    limit = min(n, m)
    while pre < limit and a[pre] == b[pre]:
        pre += 1
    suf = 0
    while suf < limit - pre and a[n - 1 - suf] == b[m - 1 - suf]:
        suf += 1
    return pre, suf


def token_delta(
    parent_tokens: list[str], child_tokens: list[str]
) -> tuple[Counter, Counter, int]:
    """(removed, inserted, unchanged_count) between two token lists."""
    pc, cc = Counter(parent_tokens), Counter(child_tokens)
    unchanged = sum((pc & cc).values())

    if max(len(parent_tokens), len(child_tokens)) > LCS_TOKEN_LIMIT:
        return pc - cc, cc - pc, unchanged

    pre, suf = _trim(parent_tokens, child_tokens)
    mid_a = parent_tokens[pre : len(parent_tokens) - suf]
    mid_b = child_tokens[pre : len(child_tokens) - suf]
    if not mid_a or not mid_b:
        return Counter(mid_a), Counter(mid_b), unchanged

    ids: dict[str, int] = {}
    a_ids = [ids.setdefault(t, len(ids)) for t in mid_a]
    b_ids = [ids.setdefault(t, len(ids)) for t in mid_b]
    blocks = match_blocks(a_ids, b_ids, _edit_budget(len(a_ids), len(b_ids)))
    if blocks is None:
        ma, mb = Counter(mid_a), Counter(mid_b)
        return ma - mb, mb - ma, unchanged

    removed = Counter(mid_a)
    inserted = Counter(mid_b)
    for i, _, size in blocks:
        for t in mid_a[i : i + size]:
            removed[t] -= 1
            inserted[t] -= 1
    return +removed, +inserted, unchanged


def diff_revisions(
    parent_text: str,
    child_text: str,
    *,
    revision_id: int = 0,
    parent_id: int | None = None,
) -> RevisionDelta:
    """Token delta between two revision texts (tokenized case-folded)."""
    removed, inserted, unchanged = token_delta(
        tokenize(parent_text), tokenize(child_text)
    )
    return RevisionDelta(
        revision_id=revision_id,
        parent_id=parent_id,
        inserted_terms=dict(inserted),
        removed_terms=dict(removed),
        unchanged_count=unchanged,
    )
