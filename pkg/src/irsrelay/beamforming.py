"""Reflection-phase design and verification optimizers.

Closed-form designs: the single-panel phase alignment that makes the
reflected path add coherently with the direct path, and the cooperative
two-panel design that maximizes the twice-reflected path through a
rank-one factorization of the panel-to-panel channel.  Two independent
oracles back them up: an element-wise coordinate-ascent refiner driven
only by channel-magnitude probes, and an exhaustive search over quantized
phases (compiled kernel with a NumPy fallback).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .channel import LinkChannel

__all__ = [
    "PhaseProfile",
    "RankOneFactors",
    "CascadeForm",
    "SearchSpaceTooLarge",
    "MAX_SEARCH_SIZE",
    "single_irs_phases",
    "decompose_inter_irs",
    "cooperative_phases",
    "coordinate_ascent_refine",
    "exhaustive_phase_search",
]

MAX_SEARCH_SIZE = 10_000_000


class SearchSpaceTooLarge(ValueError):
    """The requested exhaustive enumeration exceeds the safety guard."""


@dataclass(frozen=True, eq=False)
class PhaseProfile:
    """Unit-modulus reflection coefficients for one panel."""

    panel_label: str
    coefficients: np.ndarray

    def __post_init__(self):
        mags = np.abs(self.coefficients)
        if mags.size and np.max(np.abs(mags - 1.0)) > 1e-9:
            raise ValueError("reflection coefficients must be unit modulus")

    def __len__(self) -> int:
        return len(self.coefficients)


@dataclass(frozen=True, eq=False)
class RankOneFactors:
    """Factorization G = t1 t2^H of a rank-one panel-to-panel channel."""

    t1: np.ndarray
    t2: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return np.outer(self.t1, self.t2.conj())


def _coefficients(profile) -> np.ndarray:
    return np.asarray(getattr(profile, "coefficients", profile), dtype=complex)


def _check_nonzero(name: str, values: np.ndarray):
    if np.any(np.abs(values) == 0.0):
        raise ValueError(f"{name} has a zero-magnitude entry; its phase is undefined")


class CascadeForm:
    """Effective channel as a function of the reflection coefficients.

    h(phi1, phi2) = direct + (pair2 . phi2)(pair1 . phi1)
                           + (single1 . phi1) + (single2 . phi2)

    where the pair vectors are the two legs of the twice-reflected path and
    the single vectors the once-reflected cascades.  Calling the form
    returns |h|, which is the evaluator contract the optimizers expect.
    """

    def __init__(self, direct=0j, single1=None, pair1=None, single2=None, pair2=None):
        self.direct = complex(direct)
        self.single1, self.pair1 = self._panel_pair("1", single1, pair1)
        self.single2, self.pair2 = self._panel_pair("2", single2, pair2)
        if (pair1 is None) != (pair2 is None):
            raise ValueError("the twice-reflected path needs both panel legs")

    @staticmethod
    def _panel_pair(which, single, pair):
        if single is None and pair is None:
            empty = np.zeros(0, dtype=complex)
            return empty, empty
        if single is None:
            pair = np.asarray(pair, dtype=complex)
            return np.zeros(len(pair), dtype=complex), pair
        single = np.asarray(single, dtype=complex)
        if pair is None:
            return single, np.zeros(len(single), dtype=complex)
        pair = np.asarray(pair, dtype=complex)
        if len(pair) != len(single):
            raise ValueError(f"panel-{which} vectors disagree on element count")
        return single, pair

    @property
    def counts(self) -> tuple[int, int]:
        return len(self.single1), len(self.single2)

    def _profiles(self, profiles):
        m1, m2 = self.counts
        if m2 == 0:
            expected = (m1,) if m1 else ()
        else:
            expected = (m1, m2)
        if len(profiles) != len(expected):
            raise ValueError(f"expected {len(expected)} profiles, got {len(profiles)}")
        out = []
        for coeffs, m in zip(profiles, expected):
            coeffs = _coefficients(coeffs)
            if len(coeffs) != m:
                raise ValueError("profile length does not match element count")
            out.append(coeffs)
        while len(out) < 2:
            out.append(np.zeros(0, dtype=complex))
        return out

    def terms(self, *profiles) -> tuple[complex, complex, list[complex]]:
        """(direct, double-reflection, [single-reflection per panel]) terms."""
        phi1, phi2 = self._profiles(profiles)
        singles = []
        if len(phi1):
            singles.append(complex(self.single1 @ phi1))
        if len(phi2):
            singles.append(complex(self.single2 @ phi2))
        double = 0j
        if len(self.pair1) and len(phi1) and len(phi2):
            double = complex((self.pair2 @ phi2) * (self.pair1 @ phi1))
        return self.direct, double, singles

    def evaluate(self, *profiles) -> complex:
        direct, double, singles = self.terms(*profiles)
        return direct + double + sum(singles)

    def __call__(self, *profiles) -> float:
        return abs(self.evaluate(*profiles))


def single_irs_phases(g_direct, g_ir, g_si, label: str = "I") -> PhaseProfile:
    """Phase-align every reflected element with the direct path.

    ``g_ir`` holds the panel-to-receiver entries as they multiply into the
    cascade (the conjugated row of the reflect-to-receive link), ``g_si``
    the transmitter-to-panel entries.  The resulting composite
    g_direct + sum(g_ir * coeff * g_si) reaches magnitude
    |g_direct| + sum(|g_ir| |g_si|).
    """
    g_ir = np.asarray(g_ir, dtype=complex)
    g_si = np.asarray(g_si, dtype=complex)
    if g_ir.shape != g_si.shape or g_ir.ndim != 1 or len(g_ir) < 1:
        raise ValueError("g_ir and g_si must be 1-D vectors of equal length >= 1")
    _check_nonzero("g_ir", g_ir)
    _check_nonzero("g_si", g_si)
    phases = np.angle(complex(g_direct)) - np.angle(g_ir) - np.angle(g_si)
    return PhaseProfile(label, np.exp(1j * phases))


def decompose_inter_irs(g12) -> RankOneFactors:
    """Split the panel-to-panel channel into t1 t2^H with the gain shared.

    For a synthesized LoS link the complex gain's principal square root goes
    into both factors; a raw rank-one matrix is factored through its largest
    pivot instead (same product, factors fixed up to a unit-modulus scalar).
    """
    if isinstance(g12, LinkChannel):
        sqrt_gain = np.sqrt(complex(g12.gain))
        return RankOneFactors(sqrt_gain * g12.rx_response, np.conj(sqrt_gain) * g12.tx_response)
    matrix = np.asarray(g12, dtype=complex)
    if matrix.ndim != 2 or matrix.size == 0:
        raise ValueError("expected a 2-D channel matrix")
    if min(matrix.shape) > 1:
        singulars = np.linalg.svd(matrix, compute_uv=False)
        if singulars[1] > 1e-6 * singulars[0]:
            raise ValueError("channel matrix is not rank one")
    i, j = np.unravel_index(int(np.argmax(np.abs(matrix))), matrix.shape)
    pivot = matrix[i, j]
    if pivot == 0:
        raise ValueError("cannot factor an all-zero channel")
    sqrt_pivot = np.sqrt(pivot)
    t1 = matrix[:, j] / sqrt_pivot
    t2 = np.conj(matrix[i, :] / sqrt_pivot)
    return RankOneFactors(t1, t2)


def cooperative_phases(
    g_si1, g_i1r, g_si2, g_i2r, factors: RankOneFactors, labels=("I1", "I2")
) -> tuple[PhaseProfile, PhaseProfile]:
    """Two-panel design that maximizes the twice-reflected path.

    All channel vectors use the column convention (the reflect-to-receive
    vectors are the conjugates of their as-multiplied rows).  The returned
    profiles make both legs of the twice-reflected cascade add coherently,
    so its magnitude equals sum(|g_i2r||t1|) * sum(|t2||g_si1|).
    """
    g_si1 = np.asarray(g_si1, dtype=complex)
    g_i1r = np.asarray(g_i1r, dtype=complex)
    g_si2 = np.asarray(g_si2, dtype=complex)
    g_i2r = np.asarray(g_i2r, dtype=complex)
    t1 = np.asarray(factors.t1, dtype=complex)
    t2 = np.asarray(factors.t2, dtype=complex)
    if not (g_si1.shape == g_i1r.shape == t2.shape) or len(g_si1) < 1:
        raise ValueError("panel-1 vectors must share one length >= 1")
    if not (g_si2.shape == g_i2r.shape == t1.shape) or len(g_si2) < 1:
        raise ValueError("panel-2 vectors must share one length >= 1")
    for name, vec in (
        ("g_si1", g_si1),
        ("g_i1r", g_i1r),
        ("g_si2", g_si2),
        ("g_i2r", g_i2r),
        ("t1", t1),
        ("t2", t2),
    ):
        _check_nonzero(name, vec)
    ref1 = np.angle(complex(np.vdot(t1, g_si2)))
    phi1 = np.exp(1j * (ref1 - np.angle(np.conj(t2)) - np.angle(g_si1)))
    ref2 = np.angle(complex(np.vdot(t2, g_i1r)))
    phi2 = np.exp(1j * (ref2 - np.angle(np.conj(g_i2r)) - np.angle(t1)))
    return PhaseProfile(labels[0], phi1), PhaseProfile(labels[1], phi2)


def coordinate_ascent_refine(
    evaluator, initial_profiles, max_sweeps: int = 20, tolerance: float = 1e-12
) -> tuple[np.ndarray, ...]:
    """Element-wise ascent on |h| using only magnitude probes.

    Each element is set to its closed-form optimum given all the others,
    recovered from |h| at the three probe phases {1, -1, j}; the achieved
    magnitude never decreases.  Stops after a sweep improves |h| by less
    than ``tolerance`` or after ``max_sweeps``.
    """
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be at least 1")
    profiles = [np.array(_coefficients(p), dtype=complex, copy=True) for p in initial_profiles]
    current = float(evaluator(*profiles))
    for _ in range(max_sweeps):
        sweep_start = current
        for coeffs in profiles:
            for m in range(len(coeffs)):
                saved = coeffs[m]
                coeffs[m] = 1.0
                f_plus = float(evaluator(*profiles))
                coeffs[m] = -1.0
                f_minus = float(evaluator(*profiles))
                coeffs[m] = 1j
                f_quad = float(evaluator(*profiles))
                sq_plus, sq_minus, sq_quad = f_plus**2, f_minus**2, f_quad**2
                # h = b + phi*w: recover z = conj(b)*w from the probes.
                re_z = 0.25 * (sq_plus - sq_minus)
                power = 0.5 * (sq_plus + sq_minus)
                im_z = 0.5 * (power - sq_quad)
                amp = math.hypot(re_z, im_z)
                if amp <= 1e-15 * max(power, 1e-300):
                    coeffs[m] = saved
                else:
                    coeffs[m] = complex(re_z / amp, -im_z / amp)
        current = float(evaluator(*profiles))
        if current - sweep_start < tolerance:
            break
    return tuple(profiles)


def _generic_search(evaluator, counts, n_levels, table):
    total = sum(counts)
    m1 = counts[0]
    best_mag = -1.0
    best_digits = (0,) * total
    for digits in itertools.product(range(n_levels), repeat=total):
        idx = np.asarray(digits, dtype=np.int64)
        profiles = [table[idx[:m1]]]
        if len(counts) == 2:
            profiles.append(table[idx[m1:]])
        mag = float(evaluator(*profiles))
        if mag > best_mag:
            best_mag = mag
            best_digits = digits
    return np.asarray(best_digits, dtype=np.int64), best_mag


def exhaustive_phase_search(
    evaluator, element_counts, bits_per_phase: int
) -> tuple[tuple[np.ndarray, ...], float]:
    """Globally optimal quantized profiles by enumeration.

    Quantized phases are {2*pi*q / 2**bits_per_phase}.  When the evaluator
    is a CascadeForm whose element counts match, the enumeration runs in
    the compiled kernel (or its NumPy twin); any other callable is probed
    combination by combination.  Ties resolve to the lexicographically
    lowest phase-index tuple.  Raises SearchSpaceTooLarge beyond the
    10^7-combination guard.
    """
    counts = tuple(int(c) for c in element_counts)
    if not 1 <= len(counts) <= 2 or any(c < 1 for c in counts):
        raise ValueError("element_counts must be one or two positive integers")
    if bits_per_phase < 1:
        raise ValueError("bits_per_phase must be at least 1")
    n_levels = 2**bits_per_phase
    size = n_levels ** sum(counts)
    if size > MAX_SEARCH_SIZE:
        raise SearchSpaceTooLarge(
            f"search over {size} combinations exceeds the {MAX_SEARCH_SIZE} guard"
        )
    table = np.exp(2j * np.pi * np.arange(n_levels) / n_levels)

    form_counts = evaluator.counts if isinstance(evaluator, CascadeForm) else None
    expected = counts if len(counts) == 2 else (counts[0], 0)
    if form_counts == expected:
        digits, mag = kernels.search_bilinear(
            evaluator.direct,
            np.ascontiguousarray(evaluator.pair1),
            np.ascontiguousarray(evaluator.single1),
            np.ascontiguousarray(evaluator.pair2),
            np.ascontiguousarray(evaluator.single2),
            n_levels,
        )
    else:
        digits, mag = _generic_search(evaluator, counts, n_levels, table)
    m1 = counts[0]
    profiles = [table[digits[:m1]]]
    if len(counts) == 2:
        profiles.append(table[digits[m1:]])
    return tuple(profiles), float(mag)
