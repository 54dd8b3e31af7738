"""Steering vectors, planar-array responses and link synthesis.

Every link between two endpoints (terminal or panel) is modeled as a
rank-one matrix: a scalar complex gain set by the center-to-center
distance times the outer product of the receive and transmit array
responses.  Per-element phases come from the element positions projected
on the propagation direction, which reproduces the standard
steering-vector factorization for a rectangular grid without committing
to an angle convention for tilted panels.  Rician fading adds an i.i.d.
complex-Gaussian part with the same average power as the deterministic
component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .geometry import NodePoint, Panel, Scenario, link_distance, unit_direction

__all__ = [
    "steering_vector",
    "array_response",
    "LinkChannel",
    "los_channel",
    "rician_channel",
]


def steering_vector(phase_step: float, length: int) -> np.ndarray:
    """1-D progressive-phase vector: entry k is exp(-j*pi*k*phase_step)."""
    if length < 1:
        raise ValueError("length must be at least 1")
    k = np.arange(length)
    return np.exp(-1j * math.pi * phase_step * k)


def array_response(
    panel: Panel, direction: np.ndarray, wavelength: float, mode: str = "arrival"
) -> np.ndarray:
    """Per-element phase vector of a plane wave propagating along ``direction``.

    ``direction`` is the unit propagation vector: for ``arrival`` it points
    from the far node toward the panel, for ``departure`` from the panel
    toward the far node.  Entry for the element at position p is
    exp(-j * 2*pi/wavelength * (p - center) . direction), i.e. phases are
    referenced to the panel center.
    """
    if mode not in ("arrival", "departure"):
        raise ValueError(f"unknown mode {mode!r}")
    direction = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    rel = panel.element_positions() - panel.center
    phases = (-2.0 * math.pi / wavelength) * (rel @ direction)
    return np.exp(1j * phases)


@dataclass(eq=False)
class LinkChannel:
    """One directed link with its deterministic and (optional) faded parts.

    ``gain`` carries the path loss and the center-to-center propagation
    phase; ``rx_response`` / ``tx_response`` are the unit-modulus array
    responses (a length-1 vector of ones for a single-antenna terminal).
    ``faded_part`` is absent until Rician fading is applied.
    """

    tx_label: str
    rx_label: str
    gain: complex
    rx_response: np.ndarray
    tx_response: np.ndarray
    distance: float
    rician_tau: float = math.inf
    faded_part: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rx_response), len(self.tx_response)

    @cached_property
    def los_part(self) -> np.ndarray:
        """(m_rx, m_tx) deterministic channel matrix."""
        return self.gain * np.outer(self.rx_response, self.tx_response.conj())

    def realization(self) -> np.ndarray:
        """The matrix to evaluate rates on: faded if drawn, else the LoS part."""
        return self.faded_part if self.faded_part is not None else self.los_part


def _endpoint(obj) -> tuple[str, np.ndarray, Panel | None]:
    if isinstance(obj, Panel):
        return obj.label, obj.center, obj
    if isinstance(obj, NodePoint):
        return obj.label, obj.position, None
    raise TypeError(f"link endpoints must be NodePoint or Panel, got {type(obj)!r}")


def los_channel(tx, rx, scenario: Scenario) -> LinkChannel:
    """Synthesize the deterministic line-of-sight link from ``tx`` to ``rx``.

    The source-destination pair is rejected: that direct path is treated as
    blocked, which is why the relay exists.
    """
    tx_label, tx_pos, tx_panel = _endpoint(tx)
    rx_label, rx_pos, rx_panel = _endpoint(rx)
    if tx_label == rx_label:
        raise ValueError("link endpoints must differ")
    if {tx_label, rx_label} == {"S", "D"}:
        raise ValueError("the direct source-destination link is not modeled")

    dist = link_distance(tx_pos, rx_pos)
    alpha = scenario.pathloss_exp
    lam = scenario.wavelength
    gain = (
        math.sqrt(scenario.ref_gain)
        * np.exp(-2j * math.pi * dist / lam)
        / dist ** (alpha / 2.0)
    )
    if rx_panel is not None:
        a_r = array_response(rx_panel, unit_direction(tx_pos, rx_panel.center), lam, "arrival")
    else:
        a_r = np.ones(1, dtype=complex)
    if tx_panel is not None:
        a_t = array_response(tx_panel, unit_direction(tx_panel.center, rx_pos), lam, "departure")
    else:
        a_t = np.ones(1, dtype=complex)
    return LinkChannel(
        tx_label=tx_label,
        rx_label=rx_label,
        gain=complex(gain),
        rx_response=a_r,
        tx_response=a_t,
        distance=dist,
    )


def rician_channel(los: LinkChannel, tau: float, rng) -> LinkChannel:
    """Draw a Rician realization of ``los`` with factor ``tau`` (linear).

    The scattered part is i.i.d. circularly-symmetric complex Gaussian with
    per-entry variance equal to the LoS entry power, so the average entry
    power is preserved for every tau.  ``rng`` is either an integer seed
    (fed to a counter-based Philox generator) or a ready Generator; the
    real parts are drawn before the imaginary parts.
    """
    if not (tau >= 0.0):
        raise ValueError("Rician factor must be non-negative")
    if math.isinf(tau):
        return LinkChannel(
            tx_label=los.tx_label,
            rx_label=los.rx_label,
            gain=los.gain,
            rx_response=los.rx_response,
            tx_response=los.tx_response,
            distance=los.distance,
            rician_tau=tau,
            faded_part=los.los_part,
        )
    generator = rng if isinstance(rng, np.random.Generator) else np.random.Generator(np.random.Philox(rng))
    sigma = abs(los.gain)
    shape = los.shape
    scatter = (sigma / math.sqrt(2.0)) * (
        generator.standard_normal(shape) + 1j * generator.standard_normal(shape)
    )
    faded = math.sqrt(tau / (1.0 + tau)) * los.los_part + math.sqrt(1.0 / (1.0 + tau)) * scatter
    return LinkChannel(
        tx_label=los.tx_label,
        rx_label=los.rx_label,
        gain=los.gain,
        rx_response=los.rx_response,
        tx_response=los.tx_response,
        distance=los.distance,
        rician_tau=tau,
        faded_part=faded,
    )
