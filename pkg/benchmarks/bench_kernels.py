#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Measures the two hot loops (tokenization, token-diff matching) on
synthetic workloads sized like real revision texts, then a whole-text
fulltext extraction pass. Run:

    python benchmarks/bench_kernels.py [--quick]
"""

from __future__ import annotations

import argparse
import random
import time

from revhist._kernels import _fallback

try:
    from revhist._kernels import _speedups
except ImportError:
    _speedups = None

WORDS = (
    "archive record history stream partition index entity revision anchor "
    "timeline tournament election final sprint marathon city river bridge "
    "treaty council summit orbit signal memory ledger données straße 歴史"
).split()


def make_text(rng: random.Random, words: int) -> str:
    parts = []
    for i in range(words):
        parts.append(rng.choice(WORDS))
        if i % 13 == 12:
            parts.append(f"[[{rng.choice(WORDS).title()}]]")
    return " ".join(parts)


def make_edit_pair(rng: random.Random, n: int, edits: int):
    a = [rng.randrange(500) for _ in range(n)]
    b = list(a)
    for _ in range(edits):
        op = rng.random()
        pos = rng.randrange(max(1, len(b)))
        if op < 0.4:
            b.insert(pos, rng.randrange(500))
        elif op < 0.8 and b:
            b[pos % len(b)] = rng.randrange(500)
        elif b:
            del b[pos % len(b)]
    return a, b


def timeit(fn, *args, repeat: int = 3) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_tokenize(impl, texts):
    for text in texts:
        impl.tokenize(text)


def bench_match(impl, pairs, budget):
    for a, b in pairs:
        impl.match_blocks(a, b, budget)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    rng = random.Random(7)
    scale = 0.2 if args.quick else 1.0
    texts = [make_text(rng, 600) for _ in range(int(400 * scale))]
    total_chars = sum(len(t) for t in texts)
    pairs = [make_edit_pair(rng, 2000, 40) for _ in range(int(60 * scale))]

    impls = [("python", _fallback)]
    if _speedups is not None:
        impls.append(("c", _speedups))
    else:
        print("compiled extension not built; benchmarking fallback only")

    print(f"{'kernel':<26} {'impl':<8} {'time':>10} {'throughput':>16}")
    results = {}
    for name, impl in impls:
        t = timeit(bench_tokenize, impl, texts)
        results[("tokenize", name)] = t
        print(f"{'tokenize':<26} {name:<8} {t * 1e3:>8.1f}ms "
              f"{total_chars / t / 1e6:>12.1f} MB/s")
    for name, impl in impls:
        t = timeit(bench_match, impl, pairs, 4000)
        results[("match_blocks", name)] = t
        print(f"{'match_blocks (2k tokens)':<26} {name:<8} {t * 1e3:>8.1f}ms "
              f"{len(pairs) / t:>12.1f} diffs/s")

    if _speedups is not None:
        for kernel in ("tokenize", "match_blocks"):
            speedup = results[(kernel, "python")] / results[(kernel, "c")]
            print(f"{kernel}: compiled is {speedup:.1f}x the fallback")

        # sanity: identical outputs on this workload
        for text in texts[:20]:
            assert _fallback.tokenize(text) == _speedups.tokenize(text)
        for a, b in pairs[:5]:
            assert _fallback.match_blocks(a, b, 4000) == _speedups.match_blocks(
                a, b, 4000
            )
        print("output parity checked on sampled workloads")


if __name__ == "__main__":
    main()
