"""Per-hop rates, decode-and-forward capacities, bounds and allocation optima.

The relay forwards in a second time slot, so the end-to-end capacity is
half the smaller of the two hop rates; that minimum is always evaluated,
never assumed away by symmetry.  Closed forms cover the single-panel
deployments; the distributed deployment is handled by full synthesis plus
analytic lower/upper bounds on its capacity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .beamforming import (
    CascadeForm,
    RankOneFactors,
    cooperative_phases,
    coordinate_ascent_refine,
    decompose_inter_irs,
    single_irs_phases,
)
from .channel import LinkChannel, los_channel, rician_channel
from .geometry import Deployment, NodePoint, Panel, Scenario, build_scene

__all__ = [
    "HOP_SR",
    "HOP_RD",
    "EffectiveChannel",
    "CapacityReport",
    "HopChannels",
    "DesignedHop",
    "rate_from_gain",
    "capacity_no_irs",
    "capacity_near_r_closed_form",
    "capacity_near_s_or_d_closed_form",
    "achieved_capacity",
    "design_link",
    "evaluate_link",
    "fade_hop",
    "cascade_form",
    "effective_channel",
    "multi_capacity_lower_bound",
    "multi_capacity_upper_bound",
    "favorable_condition_deviation",
    "scaling_order_estimate",
    "optimal_rho",
]

HOP_SR = "S->R"
HOP_RD = "R->D"

STRATEGY_CLOSED_FORM = "closed-form"
STRATEGY_ASCENT = "ascent"


@dataclass(eq=False)
class EffectiveChannel:
    """One hop's composite scalar channel split into its path terms."""

    hop: str
    total: complex
    direct: complex
    single_terms: list[complex]
    double_term: complex = 0j


@dataclass(eq=False)
class CapacityReport:
    """Rates and end-to-end capacity of one evaluated configuration."""

    deployment: Deployment
    m: int
    rho: float | None
    rate_sr: float
    rate_rd: float
    capacity: float
    lower_bound: float | None = None
    upper_bound: float | None = None
    design_used: str = STRATEGY_CLOSED_FORM
    hops: tuple[EffectiveChannel, ...] = field(default=(), repr=False)


@dataclass(eq=False)
class HopChannels:
    """All synthesized links of one hop, panels ordered transmitter-side first."""

    hop: str
    tx: NodePoint
    rx: NodePoint
    direct: LinkChannel
    panels: list[Panel]
    inbound: list[LinkChannel]
    outbound: list[LinkChannel]
    inter: LinkChannel | None = None


@dataclass(eq=False)
class DesignedHop:
    channels: HopChannels
    profiles: tuple[np.ndarray, ...]


def rate_from_gain(h, power: float, noise: float) -> float:
    """Achievable rate log2(1 + power*|h|^2/noise) in bps/Hz."""
    if not noise > 0:
        raise ValueError("noise power must be strictly positive")
    return math.log2(1.0 + power * abs(h) ** 2 / noise)


def _inbound_vector(link: LinkChannel) -> np.ndarray:
    """Terminal-to-panel channel as a column vector."""
    return link.gain * link.rx_response


def _outbound_vector(link: LinkChannel) -> np.ndarray:
    """Panel-to-terminal channel in the column convention (conjugated row)."""
    return np.conj(link.gain) * link.tx_response


def _hop_panels(deployment: Deployment, panels: list[Panel], hop: str) -> list[Panel]:
    by_label = {p.label: p for p in panels}
    if deployment is Deployment.NO_IRS:
        return []
    if deployment is Deployment.NEAR_R:
        return [by_label["I"]]
    if deployment is Deployment.NEAR_S:
        return [by_label["I"]] if hop == HOP_SR else []
    if deployment is Deployment.NEAR_D:
        return [by_label["I"]] if hop == HOP_RD else []
    order = ("I1", "I2") if hop == HOP_SR else ("I2", "I3")
    return [by_label[label] for label in order]


def synthesize_hop(
    scenario: Scenario, nodes: list[NodePoint], hop_panels: list[Panel], hop: str
) -> HopChannels:
    """Build every LoS link of one hop."""
    by_label = {n.label: n for n in nodes}
    tx, rx = (by_label["S"], by_label["R"]) if hop == HOP_SR else (by_label["R"], by_label["D"])
    direct = los_channel(tx, rx, scenario)
    inbound = [los_channel(tx, panel, scenario) for panel in hop_panels]
    outbound = [los_channel(panel, rx, scenario) for panel in hop_panels]
    inter = None
    if len(hop_panels) == 2:
        inter = los_channel(hop_panels[0], hop_panels[1], scenario)
    elif len(hop_panels) > 2:
        raise ValueError("a hop is served by at most two panels")
    return HopChannels(hop, tx, rx, direct, list(hop_panels), inbound, outbound, inter)


def cascade_form(hop: HopChannels) -> tuple[CascadeForm, RankOneFactors | None]:
    """Bilinear evaluator of the hop's effective channel (LoS parts)."""
    if not hop.panels:
        return CascadeForm(direct=hop.direct.gain), None
    in1 = _inbound_vector(hop.inbound[0])
    out1 = _outbound_vector(hop.outbound[0])
    if len(hop.panels) == 1:
        return CascadeForm(direct=hop.direct.gain, single1=np.conj(out1) * in1), None
    factors = decompose_inter_irs(hop.inter)
    in2 = _inbound_vector(hop.inbound[1])
    out2 = _outbound_vector(hop.outbound[1])
    form = CascadeForm(
        direct=hop.direct.gain,
        single1=np.conj(out1) * in1,
        pair1=np.conj(factors.t2) * in1,
        single2=np.conj(out2) * in2,
        pair2=np.conj(out2) * factors.t1,
    )
    return form, factors


def design_hop_profiles(hop: HopChannels, strategy: str) -> tuple[np.ndarray, ...]:
    """Reflection coefficients for one hop's panels under the given strategy."""
    if strategy not in (STRATEGY_CLOSED_FORM, STRATEGY_ASCENT):
        raise ValueError(f"unknown beamforming strategy {strategy!r}")
    if not hop.panels:
        return ()
    if len(hop.panels) == 1:
        row = np.conj(_outbound_vector(hop.outbound[0]))
        profile = single_irs_phases(
            hop.direct.gain, row, _inbound_vector(hop.inbound[0]), label=hop.panels[0].label
        )
        profiles = (profile.coefficients,)
    else:
        factors = decompose_inter_irs(hop.inter)
        p1, p2 = cooperative_phases(
            _inbound_vector(hop.inbound[0]),
            _outbound_vector(hop.outbound[0]),
            _inbound_vector(hop.inbound[1]),
            _outbound_vector(hop.outbound[1]),
            factors,
            labels=(hop.panels[0].label, hop.panels[1].label),
        )
        profiles = (p1.coefficients, p2.coefficients)
    if strategy == STRATEGY_ASCENT:
        form, _ = cascade_form(hop)
        profiles = coordinate_ascent_refine(form, profiles, max_sweeps=10, tolerance=1e-12)
    return profiles


def effective_channel(
    hop: HopChannels, profiles: tuple[np.ndarray, ...], use_faded: bool = False
) -> EffectiveChannel:
    """Assemble the hop's composite channel for the given profiles.

    The LoS route goes through the rank-one cascade form (never
    materializing the panel-to-panel matrix); the faded route multiplies
    the drawn channel matrices directly.
    """
    if len(profiles) != len(hop.panels):
        raise ValueError("one profile per serving panel is required")
    if not use_faded:
        form, _ = cascade_form(hop)
        direct, double, singles = form.terms(*profiles)
        return EffectiveChannel(hop.hop, direct + double + sum(singles), direct, singles, double)
    direct = complex(hop.direct.realization()[0, 0])
    singles = []
    for k in range(len(hop.panels)):
        row = hop.outbound[k].realization().ravel()
        col = hop.inbound[k].realization().ravel()
        singles.append(complex((row * profiles[k]) @ col))
    double = 0j
    if hop.inter is not None:
        row2 = hop.outbound[1].realization().ravel()
        col1 = hop.inbound[0].realization().ravel()
        double = complex((row2 * profiles[1]) @ hop.inter.realization() @ (profiles[0] * col1))
    total = direct + double + sum(singles)
    return EffectiveChannel(hop.hop, total, direct, singles, double)


def fade_hop(hop: HopChannels, tau: float, rng, tau_overrides=None) -> HopChannels:
    """Draw a Rician realization of every link in the hop.

    Links are faded in a fixed order (direct, then inbound/outbound per
    panel, then the panel-to-panel link) so a shared generator stays
    reproducible.  ``tau_overrides`` maps "TX-RX" labels to per-link
    factors (linear).
    """
    overrides = tau_overrides or {}

    def _fade(link: LinkChannel) -> LinkChannel:
        link_tau = overrides.get(f"{link.tx_label}-{link.rx_label}", tau)
        return rician_channel(link, link_tau, rng)

    direct = _fade(hop.direct)
    inbound, outbound = [], []
    for k in range(len(hop.panels)):
        inbound.append(_fade(hop.inbound[k]))
        outbound.append(_fade(hop.outbound[k]))
    inter = _fade(hop.inter) if hop.inter is not None else None
    return HopChannels(hop.hop, hop.tx, hop.rx, direct, hop.panels, inbound, outbound, inter)


def design_link(
    scenario: Scenario, deployment, strategy: str = STRATEGY_CLOSED_FORM, panel_grids=None
) -> dict[str, DesignedHop]:
    """Build the scene and design profiles for both hops on the LoS channels."""
    deployment = Deployment(deployment)
    nodes, panels = build_scene(scenario, deployment, panel_grids)
    designed = {}
    for hop_name in (HOP_SR, HOP_RD):
        hop = synthesize_hop(scenario, nodes, _hop_panels(deployment, panels, hop_name), hop_name)
        designed[hop_name] = DesignedHop(hop, design_hop_profiles(hop, strategy))
    return designed


def evaluate_link(
    scenario: Scenario,
    deployment,
    designed: dict[str, DesignedHop],
    use_faded: bool = False,
    design_used: str = STRATEGY_CLOSED_FORM,
) -> CapacityReport:
    """Rates and capacity of a designed link, optionally on faded channels."""
    deployment = Deployment(deployment)
    effs = tuple(
        effective_channel(designed[h].channels, designed[h].profiles, use_faded)
        for h in (HOP_SR, HOP_RD)
    )
    rate_sr = rate_from_gain(effs[0].total, scenario.power_s, scenario.noise_power)
    rate_rd = rate_from_gain(effs[1].total, scenario.power_r, scenario.noise_power)
    lower = upper = None
    rho = None
    if deployment is Deployment.MULTI:
        rho = scenario.split_ratio
        lower = multi_capacity_lower_bound(scenario, scenario.total_elements, rho)
        upper = multi_capacity_upper_bound(scenario, scenario.total_elements, rho)
    if deployment is Deployment.NO_IRS:
        design_used = "none"
    return CapacityReport(
        deployment=deployment,
        m=scenario.total_elements,
        rho=rho,
        rate_sr=rate_sr,
        rate_rd=rate_rd,
        capacity=0.5 * min(rate_sr, rate_rd),
        lower_bound=lower,
        upper_bound=upper,
        design_used=design_used,
        hops=effs,
    )


def achieved_capacity(
    scenario: Scenario,
    deployment,
    strategy: str = STRATEGY_CLOSED_FORM,
    tau: float | None = None,
    rng=None,
    tau_overrides=None,
) -> CapacityReport:
    """Full synthesis route: scene, channels, per-hop designs, rates.

    Profiles are always designed on the LoS components; when ``tau`` is
    given the rates are then evaluated on one Rician draw (``rng`` seeds
    it), which is the standard evaluation procedure under fading.
    """
    deployment = Deployment(deployment)
    designed = design_link(scenario, deployment, strategy)
    if tau is not None:
        generator = rng if isinstance(rng, np.random.Generator) else np.random.Generator(np.random.Philox(rng))
        designed = {
            name: DesignedHop(fade_hop(dh.channels, tau, generator, tau_overrides), dh.profiles)
            for name, dh in designed.items()
        }
    return evaluate_link(scenario, deployment, designed, use_faded=tau is not None, design_used=strategy)


# ---------------------------------------------------------------------------
# Closed forms and bounds
# ---------------------------------------------------------------------------


def _direct_magnitude(scenario: Scenario) -> float:
    return math.sqrt(scenario.ref_gain) / scenario.half_distance ** (scenario.pathloss_exp / 2.0)


def _report_from_magnitudes(scenario, deployment, m, h_sr, h_rd, rho=None) -> CapacityReport:
    rate_sr = rate_from_gain(h_sr, scenario.power_s, scenario.noise_power)
    rate_rd = rate_from_gain(h_rd, scenario.power_r, scenario.noise_power)
    return CapacityReport(
        deployment=Deployment(deployment),
        m=m,
        rho=rho,
        rate_sr=rate_sr,
        rate_rd=rate_rd,
        capacity=0.5 * min(rate_sr, rate_rd),
    )


def capacity_no_irs(scenario: Scenario) -> CapacityReport:
    """Bare relay link: both hops see only the direct channel."""
    d = _direct_magnitude(scenario)
    report = _report_from_magnitudes(scenario, Deployment.NO_IRS, scenario.total_elements, d, d)
    report.design_used = "none"
    return report


def capacity_near_r_closed_form(scenario: Scenario, m: int | None = None) -> CapacityReport:
    """All elements above the relay: both hops gain the reflected path."""
    m = scenario.total_elements if m is None else int(m)
    if m < 0:
        raise ValueError("element count must be non-negative")
    h1 = scenario.relay_irs_altitude
    length = scenario.half_distance
    alpha = scenario.pathloss_exp
    reflected = (
        m
        * scenario.ref_gain
        / (h1 ** (alpha / 2.0) * (h1**2 + length**2) ** (alpha / 4.0))
    )
    h = _direct_magnitude(scenario) + reflected
    return _report_from_magnitudes(scenario, Deployment.NEAR_R, m, h, h)


def capacity_near_s_or_d_closed_form(
    scenario: Scenario, m: int | None = None, side=Deployment.NEAR_S
) -> CapacityReport:
    """All elements above an end terminal: the unaided hop is the bottleneck.

    The panel helps only the hop next to it, so the capacity equals the
    bare-link value for every element count; the aided hop's (higher) rate
    is still reported.
    """
    side = Deployment(side)
    if side not in (Deployment.NEAR_S, Deployment.NEAR_D):
        raise ValueError("side must be near-s or near-d")
    m = scenario.total_elements if m is None else int(m)
    if m < 0:
        raise ValueError("element count must be non-negative")
    h2 = scenario.end_irs_altitude
    length = scenario.half_distance
    alpha = scenario.pathloss_exp
    d = _direct_magnitude(scenario)
    aided = d + m * scenario.ref_gain / (
        h2 ** (alpha / 2.0) * (length**2 + h2**2) ** (alpha / 4.0)
    )
    if side is Deployment.NEAR_S:
        return _report_from_magnitudes(scenario, side, m, aided, d)
    return _report_from_magnitudes(scenario, side, m, d, aided)


def split_for_bounds(m: int, rho: float) -> tuple[int, int]:
    """(end-panel, middle-panel) element counts used by the bound formulas.

    Unlike scene building this tolerates the degenerate edges (zero
    elements on a panel just zeroes the corresponding path terms).
    """
    if m < 0:
        raise ValueError("element count must be non-negative")
    if not 0.0 <= rho < 0.5:
        raise ValueError("rho must lie in [0, 0.5)")
    m1 = int(math.floor(rho * m + 0.5))
    return m1, max(m - 2 * m1, 0)


def _bound_path_magnitudes(scenario: Scenario, m: int, rho: float):
    m1, m2 = split_for_bounds(m, rho)
    h1 = scenario.relay_irs_altitude
    h2 = scenario.end_irs_altitude
    length = scenario.half_distance
    alpha = scenario.pathloss_exp
    beta0 = scenario.ref_gain
    d12 = math.hypot(length, h1 - h2)
    double = m1 * m2 * beta0**1.5 / (h1 * h2 * d12) ** (alpha / 2.0)
    # Each panel's once-reflected term uses its own geometry: the end panel
    # sits at the lower altitude, the middle panel above the relay.
    single_end = m1 * beta0 / (h2 ** (alpha / 2.0) * (length**2 + h2**2) ** (alpha / 4.0))
    single_mid = m2 * beta0 / (h1 ** (alpha / 2.0) * (length**2 + h1**2) ** (alpha / 4.0))
    return _direct_magnitude(scenario), double, single_end, single_mid


def _bound_capacity(scenario: Scenario, h_mag: float) -> float:
    rate_sr = rate_from_gain(h_mag, scenario.power_s, scenario.noise_power)
    rate_rd = rate_from_gain(h_mag, scenario.power_r, scenario.noise_power)
    return 0.5 * min(rate_sr, rate_rd)


def multi_capacity_lower_bound(scenario: Scenario, m: int, rho: float) -> float:
    """Capacity of the twice-reflected path alone, net of the direct term."""
    direct, double, _, _ = _bound_path_magnitudes(scenario, m, rho)
    return _bound_capacity(scenario, max(double - direct, 0.0))


def multi_capacity_upper_bound(scenario: Scenario, m: int, rho: float) -> float:
    """Triangle-inequality ceiling: all path magnitudes added coherently."""
    direct, double, single_end, single_mid = _bound_path_magnitudes(scenario, m, rho)
    return _bound_capacity(scenario, direct + double + single_end + single_mid)


# ---------------------------------------------------------------------------
# Diagnostics and optima
# ---------------------------------------------------------------------------


def _wrap_angle(x):
    return (np.asarray(x) + math.pi) % (2.0 * math.pi) - math.pi


def favorable_condition_deviation(hop: HopChannels, profiles) -> tuple[float, float]:
    """How far a two-panel design sits from the ideal alignment conditions.

    First value: the largest per-element angular gap between each designed
    coefficient and the phase that would maximize that panel's own
    once-reflected cascade.  Second value: the largest pairwise angular gap
    among the twice-reflected, both once-reflected, and direct path phases.
    Both in radians.
    """
    if len(hop.panels) != 2:
        raise ValueError("favorable conditions are defined for the two-panel hop")
    coeffs = [np.asarray(getattr(p, "coefficients", p), dtype=complex) for p in profiles]
    element_dev = 0.0
    for k in range(2):
        target = np.conj(_inbound_vector(hop.inbound[k])) * _outbound_vector(hop.outbound[k])
        gaps = np.abs(_wrap_angle(np.angle(coeffs[k]) - np.angle(target)))
        element_dev = max(element_dev, float(np.max(gaps)))
    form, _ = cascade_form(hop)
    direct, double, singles = form.terms(*coeffs)
    phases = [np.angle(double), np.angle(singles[0]), np.angle(singles[1]), np.angle(direct)]
    align_dev = 0.0
    for i in range(len(phases)):
        for j in range(i + 1, len(phases)):
            align_dev = max(align_dev, float(abs(_wrap_angle(phases[i] - phases[j]))))
    return element_dev, align_dev


def scaling_order_estimate(capacity_fn, m_grid) -> float:
    """Least-squares slope of capacity against log2(element count)."""
    grid = [int(m) for m in m_grid]
    if len(grid) < 3:
        raise ValueError("need at least three grid points for a slope fit")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("element-count grid must be strictly increasing")
    x = np.log2(np.asarray(grid, dtype=float))
    y = np.asarray([float(capacity_fn(m)) for m in grid])
    return float(np.polyfit(x, y, 1)[0])


def optimal_rho(
    scenario: Scenario,
    m: int,
    mode: str = "closed-form",
    grid_step: float = 0.01,
    objective: str = "upper-bound",
    strategy: str = STRATEGY_CLOSED_FORM,
) -> float:
    """Element split that maximizes the distributed-deployment capacity.

    ``closed-form`` returns the argmax 1/4 of the asymptotic product
    rho*(1-2*rho); ``sweep`` scans a grid with the given step and maximizes
    either the capacity upper bound or the fully synthesized capacity.
    """
    if mode == "closed-form":
        return 0.25
    if mode != "sweep":
        raise ValueError(f"unknown mode {mode!r}")
    if not 0 < grid_step < 0.5:
        raise ValueError("grid_step must lie in (0, 0.5)")
    grid = [i * grid_step for i in range(1, int(math.ceil(0.5 / grid_step)))]
    grid = [rho for rho in grid if rho < 0.5 - 1e-12]
    if len(grid) < 10:
        raise ValueError("grid_step must divide (0, 0.5) into at least 10 points")
    best_rho, best_value = None, -math.inf
    for rho in grid:
        if objective == "upper-bound":
            value = multi_capacity_upper_bound(scenario, m, rho)
        elif objective == "achieved":
            trial = replace(scenario, total_elements=m, split_ratio=rho)
            try:
                value = achieved_capacity(trial, Deployment.MULTI, strategy).capacity
            except ValueError:
                continue
        else:
            raise ValueError(f"unknown objective {objective!r}")
        if value > best_value:
            best_rho, best_value = rho, value
    if best_rho is None:
        raise ValueError("no feasible split on the sweep grid")
    return best_rho
