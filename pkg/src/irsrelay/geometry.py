"""3D scene construction for the relay link.

Places the source, relay and destination on the ground, mounts the
reflecting panels above them with the configured orientation, and lays
out each panel's element grid.  All downstream channel synthesis works
from the node positions and panel frames produced here.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Deployment",
    "Scenario",
    "NodePoint",
    "Panel",
    "build_scene",
    "link_distance",
    "unit_direction",
    "split_elements",
    "near_square_grid",
]


class Deployment(str, Enum):
    """Where the reflecting element budget is installed."""

    NO_IRS = "no-irs"
    NEAR_S = "near-s"
    NEAR_R = "near-r"
    NEAR_D = "near-d"
    MULTI = "multi"


@dataclass(frozen=True)
class Scenario:
    """Physical parameters of one relay link.

    Lengths are in meters, powers in watts, angles in radians.
    ``ref_gain`` is the linear channel power gain at the 1 m reference
    distance; ``split_ratio`` is the fraction of the element budget put on
    each of the two end panels under the distributed deployment.
    """

    half_distance: float = 500.0
    relay_irs_altitude: float = 5.0
    end_irs_altitude: float = 4.0
    downtilt: float = math.pi / 4
    wavelength: float = 0.05
    ref_gain: float = 1e-3
    pathloss_exp: float = 2.0
    power_s: float = 1.0
    power_r: float = 1.0
    noise_power: float = 1e-12
    element_spacing: float = 0.0125
    total_elements: int = 100
    split_ratio: float = 0.25

    def __post_init__(self):
        positive = (
            "half_distance",
            "relay_irs_altitude",
            "end_irs_altitude",
            "wavelength",
            "ref_gain",
            "power_s",
            "power_r",
            "noise_power",
            "element_spacing",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.end_irs_altitude >= self.relay_irs_altitude:
            raise ValueError("end_irs_altitude must be below relay_irs_altitude")
        if not self.pathloss_exp > 0:
            raise ValueError("pathloss_exp must be strictly positive")
        if self.pathloss_exp < 2.0:
            warnings.warn(
                f"pathloss_exp={self.pathloss_exp} is below the free-space value 2",
                stacklevel=2,
            )
        if self.total_elements < 0:
            raise ValueError("total_elements must be non-negative")
        if not 0.0 < self.split_ratio < 0.5:
            raise ValueError("split_ratio must lie in the open interval (0, 0.5)")


@dataclass(frozen=True, eq=False)
class NodePoint:
    """A single-antenna terminal: the source, relay or destination."""

    label: str
    position: np.ndarray


@dataclass(frozen=True, eq=False)
class Panel:
    """A rectangular grid of passive reflecting elements.

    ``axis_h`` and ``axis_v`` span the panel plane and ``normal`` is their
    right-handed cross product; all three are unit vectors.  Elements sit on
    a ``count_h`` x ``count_v`` grid centered on ``center`` with pitch
    ``spacing``.
    """

    label: str
    center: np.ndarray
    axis_h: np.ndarray
    axis_v: np.ndarray
    normal: np.ndarray
    count_h: int
    count_v: int
    spacing: float

    def __post_init__(self):
        for name in ("axis_h", "axis_v", "normal"):
            vec = getattr(self, name)
            if abs(np.linalg.norm(vec) - 1.0) > 1e-9:
                raise ValueError(f"{name} must be a unit vector")
        if abs(np.dot(self.axis_h, self.axis_v)) > 1e-9:
            raise ValueError("axis_h and axis_v must be orthogonal")
        if np.linalg.norm(np.cross(self.axis_h, self.axis_v) - self.normal) > 1e-9:
            raise ValueError("normal must equal axis_h x axis_v")
        if self.count_h < 1 or self.count_v < 1:
            raise ValueError("element counts must be at least 1")
        if not self.spacing > 0:
            raise ValueError("spacing must be strictly positive")

    @property
    def element_count(self) -> int:
        return self.count_h * self.count_v

    def element_positions(self) -> np.ndarray:
        """(count_h * count_v, 3) element centers, horizontal index slowest."""
        ih = np.arange(self.count_h) - (self.count_h - 1) / 2.0
        iv = np.arange(self.count_v) - (self.count_v - 1) / 2.0
        offsets = ih[:, None, None] * self.axis_h + iv[None, :, None] * self.axis_v
        return (self.center + self.spacing * offsets).reshape(-1, 3)


def link_distance(a, b) -> float:
    """Euclidean distance between two points; rejects coincident inputs."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not np.any(a != b):
        raise ValueError("coincident points have no link geometry")
    return float(np.linalg.norm(b - a))


def unit_direction(a, b) -> np.ndarray:
    """Unit vector pointing from ``a`` to ``b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = link_distance(a, b)
    return (b - a) / d


def near_square_grid(count: int) -> tuple[int, int]:
    """Factor ``count`` into the most nearly square (count_h, count_v) pair.

    count_h is the largest divisor of ``count`` not exceeding sqrt(count),
    so count_h <= count_v always.
    """
    if count < 1:
        raise ValueError("element count must be at least 1")
    h = int(math.isqrt(count))
    while count % h:
        h -= 1
    return h, count // h


def split_elements(total: int, split_ratio: float) -> tuple[int, int, int]:
    """Allocate ``total`` elements to the (end, middle, end) panels.

    Each end panel gets round(split_ratio * total) elements (half away from
    zero) so the total is preserved exactly; every panel must end up with at
    least one element.
    """
    if not 0.0 < split_ratio < 0.5:
        raise ValueError("split_ratio must lie in (0, 0.5)")
    side = int(math.floor(split_ratio * total + 0.5))
    middle = total - 2 * side
    if side < 1 or middle < 1:
        raise ValueError(
            f"split of {total} elements at ratio {split_ratio} leaves an empty panel"
        )
    return side, middle, side


def _grid_for(label: str, count: int, panel_grids) -> tuple[int, int]:
    if panel_grids and label in panel_grids:
        h, v = panel_grids[label]
        if h < 1 or v < 1 or h * v != count:
            raise ValueError(
                f"explicit grid {h}x{v} for panel {label} does not hold {count} elements"
            )
        return int(h), int(v)
    return near_square_grid(count)


def _relay_side_panel(label, center, count_h, count_v, spacing) -> Panel:
    # Parallel to the ground plane, face down toward the terminals.
    return Panel(
        label=label,
        center=np.asarray(center, dtype=float),
        axis_h=np.array([1.0, 0.0, 0.0]),
        axis_v=np.array([0.0, -1.0, 0.0]),
        normal=np.array([0.0, 0.0, -1.0]),
        count_h=count_h,
        count_v=count_v,
        spacing=spacing,
    )


def _end_panel(label, center, downtilt, toward_positive_x, count_h, count_v, spacing) -> Panel:
    # Horizontal axis along y; the normal leans ``downtilt`` away from
    # straight-down, facing the relay side of the link.
    sgn = 1.0 if toward_positive_x else -1.0
    axis_h = np.array([0.0, 1.0, 0.0])
    normal = np.array([sgn * math.sin(downtilt), 0.0, -math.cos(downtilt)])
    axis_v = np.cross(normal, axis_h)
    return Panel(
        label=label,
        center=np.asarray(center, dtype=float),
        axis_h=axis_h,
        axis_v=axis_v,
        normal=normal,
        count_h=count_h,
        count_v=count_v,
        spacing=spacing,
    )


# Which terminals each panel is expected to face (front-side check).
_SERVED_NODES = {
    Deployment.NEAR_S: {"I": ("S", "R")},
    Deployment.NEAR_R: {"I": ("S", "R", "D")},
    Deployment.NEAR_D: {"I": ("R", "D")},
    Deployment.MULTI: {"I1": ("S", "R"), "I2": ("S", "R", "D"), "I3": ("R", "D")},
}


def build_scene(
    scenario: Scenario,
    deployment: Deployment | str,
    panel_grids: dict[str, tuple[int, int]] | None = None,
) -> tuple[list[NodePoint], list[Panel]]:
    """Place the three terminals and the panels for one deployment.

    ``panel_grids`` optionally pins an explicit (count_h, count_v) grid per
    panel label instead of the near-square default.  Emits a warning if a
    served terminal ends up behind a panel face; the scene is still returned.
    """
    deployment = Deployment(deployment)
    length = scenario.half_distance
    nodes = [
        NodePoint("S", np.array([0.0, 0.0, 0.0])),
        NodePoint("R", np.array([length, 0.0, 0.0])),
        NodePoint("D", np.array([2.0 * length, 0.0, 0.0])),
    ]

    spacing = scenario.element_spacing
    total = scenario.total_elements
    panels: list[Panel] = []
    if deployment is Deployment.NO_IRS:
        return nodes, panels
    if total < 1:
        raise ValueError(f"deployment {deployment.value} needs at least one element")

    if deployment is Deployment.NEAR_R:
        h, v = _grid_for("I", total, panel_grids)
        panels.append(
            _relay_side_panel("I", [length, 0.0, scenario.relay_irs_altitude], h, v, spacing)
        )
    elif deployment is Deployment.NEAR_S:
        h, v = _grid_for("I", total, panel_grids)
        panels.append(
            _end_panel("I", [0.0, 0.0, scenario.end_irs_altitude], scenario.downtilt, True, h, v, spacing)
        )
    elif deployment is Deployment.NEAR_D:
        h, v = _grid_for("I", total, panel_grids)
        panels.append(
            _end_panel(
                "I",
                [2.0 * length, 0.0, scenario.end_irs_altitude],
                scenario.downtilt,
                False,
                h,
                v,
                spacing,
            )
        )
    else:  # multi
        m1, m2, m3 = split_elements(total, scenario.split_ratio)
        h1, v1 = _grid_for("I1", m1, panel_grids)
        h2, v2 = _grid_for("I2", m2, panel_grids)
        h3, v3 = _grid_for("I3", m3, panel_grids)
        panels.append(
            _end_panel("I1", [0.0, 0.0, scenario.end_irs_altitude], scenario.downtilt, True, h1, v1, spacing)
        )
        panels.append(
            _relay_side_panel("I2", [length, 0.0, scenario.relay_irs_altitude], h2, v2, spacing)
        )
        panels.append(
            _end_panel(
                "I3",
                [2.0 * length, 0.0, scenario.end_irs_altitude],
                scenario.downtilt,
                False,
                h3,
                v3,
                spacing,
            )
        )

    node_by_label = {n.label: n for n in nodes}
    for panel in panels:
        for node_label in _SERVED_NODES[deployment].get(panel.label, ()):
            node = node_by_label[node_label]
            incidence = unit_direction(node.position, panel.center)
            if float(np.dot(panel.normal, incidence)) >= 0.0:
                warnings.warn(
                    f"terminal {node_label} lies behind panel {panel.label}",
                    stacklevel=2,
                )
    return nodes, panels
