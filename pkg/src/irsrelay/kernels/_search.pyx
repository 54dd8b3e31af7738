# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled enumeration kernel for the quantized phase search.

Walks the phase-index odometer (last element fastest) and keeps the four
partial sums of the bilinear channel form up to date incrementally, so
each combination costs O(1) amortized work instead of O(M).
"""

from libc.stdlib cimport free, malloc

import numpy as np


def search_bilinear(double complex base,
                    double complex[::1] w1, double complex[::1] s1,
                    double complex[::1] w2, double complex[::1] s2,
                    long long n_levels):
    """Exhaustive search over the quantized phase grid.

    Mirrors irsrelay.kernels._pykernels.search_bilinear: returns
    (digits, magnitude) with ties broken toward the lexicographically
    lowest index tuple.
    """
    cdef Py_ssize_t m1 = w1.shape[0]
    cdef Py_ssize_t m2 = w2.shape[0]
    cdef Py_ssize_t total = m1 + m2
    cdef Py_ssize_t i, pos
    cdef long long q_old, q_new
    if s1.shape[0] != m1 or s2.shape[0] != m2:
        raise ValueError("mismatched coefficient vector lengths")
    if n_levels < 1:
        raise ValueError("n_levels must be at least 1")
    if total == 0:
        return np.empty(0, dtype=np.int64), abs(base)

    table_arr = np.exp(2j * np.pi * np.arange(n_levels) / n_levels)
    cdef double complex[::1] table = table_arr

    cdef long long *digits = <long long *> malloc(total * sizeof(long long))
    cdef long long *best = <long long *> malloc(total * sizeof(long long))
    if digits == NULL or best == NULL:
        free(digits)
        free(best)
        raise MemoryError()

    cdef double complex sw1 = 0, ss1 = 0, sw2 = 0, ss2 = 0
    cdef double complex h, delta
    cdef double mag2, best_mag2 = -1.0
    cdef bint wrapped = False

    try:
        for i in range(total):
            digits[i] = 0
            best[i] = 0
        # All-zero digits mean phase 1 on every element.
        for i in range(m1):
            sw1 += w1[i]
            ss1 += s1[i]
        for i in range(m2):
            sw2 += w2[i]
            ss2 += s2[i]

        while True:
            h = base + ss1 + ss2 + sw2 * sw1
            mag2 = h.real * h.real + h.imag * h.imag
            if mag2 > best_mag2:
                best_mag2 = mag2
                for i in range(total):
                    best[i] = digits[i]
            # Odometer step: increment the last position, carry leftward.
            pos = total - 1
            while True:
                q_old = digits[pos]
                q_new = q_old + 1
                if q_new == n_levels:
                    q_new = 0
                digits[pos] = q_new
                delta = table[q_new] - table[q_old]
                if pos < m1:
                    sw1 += w1[pos] * delta
                    ss1 += s1[pos] * delta
                else:
                    sw2 += w2[pos - m1] * delta
                    ss2 += s2[pos - m1] * delta
                if q_new != 0:
                    break
                if pos == 0:
                    wrapped = True
                    break
                pos -= 1
            if wrapped:
                break

        out = np.empty(total, dtype=np.int64)
        for i in range(total):
            out[i] = best[i]
        return out, float(np.sqrt(best_mag2))
    finally:
        free(digits)
        free(best)
