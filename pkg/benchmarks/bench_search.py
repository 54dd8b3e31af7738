#!/usr/bin/env python3
"""Benchmark the exhaustive phase-search kernel: compiled vs NumPy fallback.

Run from the repository root after installing the package:

    python3 benchmarks/bench_search.py
"""

import time

import numpy as np

from irsrelay.kernels import _pykernels

try:
    from irsrelay.kernels import _search as compiled
except ImportError:
    compiled = None

CASES = (
    # (m1, m2, levels) -> levels**(m1+m2) combinations
    (2, 2, 8),
    (4, 4, 4),
    (5, 5, 4),
    (6, 5, 4),
    (7, 0, 8),
)


def _instance(rng, m1, m2):
    def vec(m):
        return rng.normal(size=m) + 1j * rng.normal(size=m)

    return complex(rng.normal(), rng.normal()), vec(m1), vec(m1), vec(m2), vec(m2)


def _time(fn, *args, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    rng = np.random.default_rng(0)
    print(f"{'combinations':>14} {'numpy (s)':>12} {'compiled (s)':>14} {'speedup':>9}")
    for m1, m2, levels in CASES:
        base, w1, s1, w2, s2 = _instance(rng, m1, m2)
        size = levels ** (m1 + m2)
        py_time, (py_digits, py_mag) = _time(
            _pykernels.search_bilinear, base, w1, s1, w2, s2, levels
        )
        if compiled is None:
            print(f"{size:>14,} {py_time:>12.4f} {'not built':>14} {'-':>9}")
            continue
        cy_time, (cy_digits, cy_mag) = _time(
            compiled.search_bilinear, base, w1, s1, w2, s2, levels
        )
        assert np.array_equal(py_digits, cy_digits), "backends disagree on the argmax"
        assert abs(py_mag - cy_mag) <= 1e-9 * py_mag, "backends disagree on the gain"
        print(f"{size:>14,} {py_time:>12.4f} {cy_time:>14.4f} {py_time / cy_time:>8.1f}x")
    if compiled is None:
        print("compiled kernel unavailable; rebuild with `pip install -e . --no-build-isolation`")


if __name__ == "__main__":
    main()
