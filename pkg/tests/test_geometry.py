import math

import numpy as np
import pytest

from irsrelay.geometry import (
    Deployment,
    Panel,
    Scenario,
    build_scene,
    link_distance,
    near_square_grid,
    split_elements,
    unit_direction,
)


def test_scenario_defaults_are_valid():
    s = Scenario()
    assert s.half_distance == 500.0
    assert s.relay_irs_altitude == 5.0
    assert s.end_irs_altitude == 4.0
    assert s.downtilt == math.pi / 4
    assert s.element_spacing == s.wavelength / 4


@pytest.mark.parametrize(
    "kwargs",
    [
        {"half_distance": 0.0},
        {"ref_gain": -1e-3},
        {"power_s": 0.0},
        {"noise_power": 0.0},
        {"end_irs_altitude": 5.0},  # must stay below the relay panel
        {"end_irs_altitude": 6.0},
        {"pathloss_exp": 0.0},
        {"split_ratio": 0.0},
        {"split_ratio": 0.5},
        {"total_elements": -1},
    ],
)
def test_scenario_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        Scenario(**kwargs)


def test_scenario_warns_on_sub_freespace_exponent():
    with pytest.warns(UserWarning):
        Scenario(pathloss_exp=1.5)


def test_nodes_at_canonical_positions():
    nodes, _ = build_scene(Scenario(), Deployment.NO_IRS)
    by_label = {n.label: n.position for n in nodes}
    assert np.array_equal(by_label["S"], [0.0, 0.0, 0.0])
    assert np.array_equal(by_label["R"], [500.0, 0.0, 0.0])
    assert np.array_equal(by_label["D"], [1000.0, 0.0, 0.0])


def test_near_r_scene_matches_reference_layout():
    nodes, panels = build_scene(Scenario(total_elements=100), "near-r")
    assert len(panels) == 1
    panel = panels[0]
    assert panel.label == "I"
    assert np.array_equal(panel.center, [500.0, 0.0, 5.0])
    assert (panel.count_h, panel.count_v) == (10, 10)
    assert np.array_equal(panel.normal, [0.0, 0.0, -1.0])
    assert np.array_equal(panel.axis_h, [1.0, 0.0, 0.0])
    assert np.array_equal(panel.axis_v, [0.0, -1.0, 0.0])


def test_multi_split_smallest_legal():
    _, panels = build_scene(Scenario(total_elements=4, split_ratio=0.25), "multi")
    assert [p.element_count for p in panels] == [1, 2, 1]
    assert [p.label for p in panels] == ["I1", "I2", "I3"]


def test_multi_split_reference_allocation():
    _, panels = build_scene(Scenario(total_elements=200, split_ratio=0.25), "multi")
    assert [p.element_count for p in panels] == [50, 100, 50]


def test_split_preserves_total():
    for total in (4, 7, 11, 40, 201, 1000):
        for rho in (0.1, 0.25, 0.4):
            try:
                m1, m2, m3 = split_elements(total, rho)
            except ValueError:
                continue
            assert m1 + m2 + m3 == total
            assert m1 == m3 >= 1 and m2 >= 1


def test_split_rejects_empty_panels():
    with pytest.raises(ValueError):
        split_elements(2, 0.25)  # end panels would be empty after rounding
    with pytest.raises(ValueError):
        split_elements(4, 0.45)  # middle panel would be empty


def test_end_panel_orientations():
    _, panels = build_scene(Scenario(total_elements=12, split_ratio=0.25), "multi")
    theta = math.pi / 4
    i1, i2, i3 = panels
    assert np.allclose(i1.normal, [math.sin(theta), 0.0, -math.cos(theta)])
    assert np.allclose(i3.normal, [-math.sin(theta), 0.0, -math.cos(theta)])
    assert np.array_equal(i1.center, [0.0, 0.0, 4.0])
    assert np.array_equal(i2.center, [500.0, 0.0, 5.0])
    assert np.array_equal(i3.center, [1000.0, 0.0, 4.0])
    for p in panels:
        assert np.allclose(np.cross(p.axis_h, p.axis_v), p.normal, atol=1e-12)


def test_no_irs_scene_has_no_panels():
    _, panels = build_scene(Scenario(), "no-irs")
    assert panels == []


def test_link_distance_examples():
    assert link_distance([0, 0, 0], [500, 0, 0]) == 500.0
    assert np.array_equal(unit_direction([0, 0, 0], [500, 0, 0]), [1.0, 0.0, 0.0])
    # hand evaluation of the Euclidean norms
    assert link_distance([0, 0, 4], [500, 0, 5]) == pytest.approx(math.sqrt(500**2 + 1), rel=0, abs=1e-12)
    assert link_distance([0, 0, 0], [500, 0, 5]) == pytest.approx(math.sqrt(250025), rel=0, abs=1e-12)


def test_coincident_points_rejected():
    with pytest.raises(ValueError):
        link_distance([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        unit_direction([0.0, 0.0, 0.0], [0.0, 0.0, 0.0])


def test_near_square_grid():
    assert near_square_grid(100) == (10, 10)
    assert near_square_grid(50) == (5, 10)
    assert near_square_grid(13) == (1, 13)
    assert near_square_grid(1) == (1, 1)
    for m in range(1, 200):
        h, v = near_square_grid(m)
        assert h * v == m and h <= v


def test_explicit_panel_grid_override():
    _, panels = build_scene(Scenario(total_elements=100), "near-r", panel_grids={"I": (4, 25)})
    assert (panels[0].count_h, panels[0].count_v) == (4, 25)
    with pytest.raises(ValueError):
        build_scene(Scenario(total_elements=100), "near-r", panel_grids={"I": (3, 25)})


def test_element_grid_centroid_is_panel_center():
    for deployment in ("near-s", "near-r", "near-d", "multi"):
        _, panels = build_scene(Scenario(total_elements=36, split_ratio=0.25), deployment)
        for panel in panels:
            centroid = panel.element_positions().mean(axis=0)
            assert np.max(np.abs(centroid - panel.center)) < 1e-12


def test_element_grid_pitch():
    _, panels = build_scene(Scenario(total_elements=4), "near-r")
    pos = panels[0].element_positions()
    # 2x2 grid: adjacent elements along each axis are one pitch apart
    assert np.linalg.norm(pos[0] - pos[1]) == pytest.approx(0.0125, rel=1e-9)
    assert np.linalg.norm(pos[0] - pos[2]) == pytest.approx(0.0125, rel=1e-9)


def _mirror(points: np.ndarray, half_distance: float) -> np.ndarray:
    out = points.copy()
    out[:, 0] = 2.0 * half_distance - out[:, 0]
    return out


def _sorted_rows(points: np.ndarray) -> np.ndarray:
    return points[np.lexsort(points.T[::-1])]


def test_multi_scene_mirror_symmetry():
    s = Scenario(total_elements=60, split_ratio=0.25)
    nodes, panels = build_scene(s, "multi")
    by_label = {p.label: p for p in panels}
    node_by_label = {n.label: n.position for n in nodes}
    # the transmit-side scene of hop 1 mirrors onto the receive-side scene of hop 2
    assert np.allclose(_mirror(node_by_label["S"][None], 500.0)[0], node_by_label["D"])
    mirrored_i1 = _mirror(by_label["I1"].element_positions(), 500.0)
    assert np.max(np.abs(_sorted_rows(mirrored_i1) - _sorted_rows(by_label["I3"].element_positions()))) < 1e-12
    mirrored_i2 = _mirror(by_label["I2"].element_positions(), 500.0)
    assert np.max(np.abs(_sorted_rows(mirrored_i2) - _sorted_rows(by_label["I2"].element_positions()))) < 1e-12


def test_build_scene_deterministic():
    s = Scenario(total_elements=48, split_ratio=0.3)
    nodes_a, panels_a = build_scene(s, "multi")
    nodes_b, panels_b = build_scene(s, "multi")
    for a, b in zip(nodes_a, nodes_b):
        assert np.array_equal(a.position, b.position)
    for a, b in zip(panels_a, panels_b):
        assert np.array_equal(a.element_positions(), b.element_positions())


def test_warns_when_served_node_behind_panel():
    # tilting the end panel past vertical points its face away from the ground
    with pytest.warns(UserWarning, match="behind"):
        build_scene(Scenario(total_elements=4, downtilt=2.5), "near-s")


def test_panel_frame_validation():
    with pytest.raises(ValueError):
        Panel(
            label="I",
            center=np.zeros(3),
            axis_h=np.array([1.0, 0.0, 0.0]),
            axis_v=np.array([1.0, 0.0, 0.0]),
            normal=np.array([0.0, 0.0, 1.0]),
            count_h=1,
            count_v=1,
            spacing=0.01,
        )
