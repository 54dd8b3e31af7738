"""Capacity analysis of a decode-and-forward relay link aided by passive
reflecting surfaces: scene geometry, LoS/Rician channel synthesis,
reflection-phase design, capacity bounds and scaling, and experiment
drivers with CSV output."""

from .beamforming import (
    CascadeForm,
    MAX_SEARCH_SIZE,
    PhaseProfile,
    RankOneFactors,
    SearchSpaceTooLarge,
    cooperative_phases,
    coordinate_ascent_refine,
    decompose_inter_irs,
    exhaustive_phase_search,
    single_irs_phases,
)
from .capacity import (
    HOP_RD,
    HOP_SR,
    CapacityReport,
    EffectiveChannel,
    achieved_capacity,
    capacity_near_r_closed_form,
    capacity_near_s_or_d_closed_form,
    capacity_no_irs,
    favorable_condition_deviation,
    multi_capacity_lower_bound,
    multi_capacity_upper_bound,
    optimal_rho,
    rate_from_gain,
    scaling_order_estimate,
)
from .channel import LinkChannel, array_response, los_channel, rician_channel, steering_vector
from .geometry import (
    Deployment,
    NodePoint,
    Panel,
    Scenario,
    build_scene,
    link_distance,
    unit_direction,
)

__version__ = "0.1.0"
