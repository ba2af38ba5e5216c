"""Pure-Python implementations of the hot kernels.

The compiled module ``revhist._kernels._speedups`` mirrors these two
functions exactly; parity is enforced by property tests. Keep any
behavioural change in both places.
"""

from __future__ import annotations

import re

IMPLEMENTATION = "python"

# re's \w is Py_UNICODE_ISALNUM plus underscore; the compiled scanner
# uses the same predicate so both paths tokenize identically.
_WORD_RE = re.compile(r"\w+")


def tokenize(text: str) -> list[str]:
    """Case-folded Unicode word tokens, in order. No stemming, no stopwords."""
    return _WORD_RE.findall(text.casefold())


def match_blocks(
    a: list[int], b: list[int], max_edits: int
) -> list[tuple[int, int, int]] | None:
    """Greedy shortest-edit-script matcher over two id sequences.

    Returns the matched runs as (a_start, b_start, length) triples in
    ascending order; together they form a common subsequence of maximal
    length when ``max_edits >= len(a) + len(b)``. Returns None when no
    edit script within ``max_edits`` exists (work cap for adversarial
    inputs; callers fall back to multiset semantics).
    """
    n, m = len(a), len(b)
    max_d = min(max_edits, n + m)
    if max_d < abs(n - m):
        return None
    # one slack slot each side: the k == -d branch reads V[k + 1] at d == max_d
    offset = max_d + 1
    v = [0] * (2 * max_d + 3)
    trace: list[list[int]] = []
    final_d = -1
    for d in range(max_d + 1):
        trace.append(v.copy())
        for k in range(-d, d + 1, 2):
            if k == -d or (k != d and v[offset + k - 1] < v[offset + k + 1]):
                x = v[offset + k + 1]
            else:
                x = v[offset + k - 1] + 1
            y = x - k
            while x < n and y < m and a[x] == b[y]:
                x += 1
                y += 1
            v[offset + k] = x
            if x >= n and y >= m:
                final_d = d
                break
        if final_d >= 0:
            break
    if final_d < 0:
        return None

    blocks: list[tuple[int, int, int]] = []
    x, y = n, m
    for d in range(final_d, 0, -1):
        vprev = trace[d]
        k = x - y
        if k == -d or (k != d and vprev[offset + k - 1] < vprev[offset + k + 1]):
            prev_k = k + 1
        else:
            prev_k = k - 1
        prev_x = vprev[offset + prev_k]
        prev_y = prev_x - prev_k
        if prev_k == k + 1:
            mid_x, mid_y = prev_x, prev_y + 1
        else:
            mid_x, mid_y = prev_x + 1, prev_y
        snake = x - mid_x
        if snake > 0:
            blocks.append((mid_x, mid_y, snake))
        x, y = prev_x, prev_y
    if x > 0:
        blocks.append((0, 0, x))
    blocks.reverse()
    return blocks
