"""NumPy fallback for the quantized phase-search kernel.

Enumerates every phase-index tuple in lexicographic order (last element
fastest) in vectorized chunks.  The effective channel is the bilinear
form

    h = base + (w2 . phi2) * (w1 . phi1) + (s1 . phi1) + (s2 . phi2)

with phi drawn from the n_levels-point uniform phase grid.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 1 << 15


def search_bilinear(base, w1, s1, w2, s2, n_levels):
    """Exhaustive search over the quantized phase grid.

    Returns (digits, magnitude): the phase indices of the best combination
    (panel-1 elements first) and the achieved |h|.  Ties resolve to the
    lexicographically lowest index tuple.
    """
    w1 = np.asarray(w1, dtype=complex)
    s1 = np.asarray(s1, dtype=complex)
    w2 = np.asarray(w2, dtype=complex)
    s2 = np.asarray(s2, dtype=complex)
    m1, m2 = len(w1), len(w2)
    total = m1 + m2
    n_combos = n_levels**total
    table = np.exp(2j * np.pi * np.arange(n_levels) / n_levels)
    # Place value of each digit position; the last position varies fastest.
    place = n_levels ** np.arange(total - 1, -1, -1, dtype=np.int64)

    best_mag = -1.0
    best_digits = np.zeros(total, dtype=np.int64)
    for start in range(0, n_combos, _CHUNK):
        ids = np.arange(start, min(start + _CHUNK, n_combos), dtype=np.int64)
        digits = (ids[:, None] // place[None, :]) % n_levels
        phases = table[digits]
        h = np.full(len(ids), base, dtype=complex)
        if m1:
            h += phases[:, :m1] @ s1
        if m2:
            h += phases[:, m1:] @ s2
        if m1 and m2:
            h += (phases[:, m1:] @ w2) * (phases[:, :m1] @ w1)
        mags = np.abs(h)
        local = int(np.argmax(mags))
        if mags[local] > best_mag:
            best_mag = float(mags[local])
            best_digits = digits[local].copy()
    return best_digits, best_mag
