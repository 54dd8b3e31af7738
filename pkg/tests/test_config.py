import math

import pytest

from irsrelay.config import (
    ConfigError,
    ExperimentConfig,
    db_to_linear,
    dbm_to_watts,
    emit_config,
    parse_config,
    to_scenario,
)
from irsrelay.geometry import Scenario


def test_unit_conversions():
    assert db_to_linear(-30.0) == pytest.approx(1e-3, rel=1e-12)
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(math.inf) == math.inf
    assert dbm_to_watts(30.0) == pytest.approx(1.0, rel=1e-12)
    assert dbm_to_watts(-90.0) == pytest.approx(1e-12, rel=1e-12)


def test_default_config_reproduces_reference_scenario():
    cfg = ExperimentConfig()
    scenario = to_scenario(cfg, 100)
    reference = Scenario(total_elements=100)
    assert scenario.half_distance == reference.half_distance == 500.0
    assert scenario.relay_irs_altitude == 5.0
    assert scenario.end_irs_altitude == 4.0
    assert scenario.downtilt == math.pi / 4
    assert scenario.wavelength == 0.05
    assert scenario.ref_gain == pytest.approx(1e-3, rel=1e-15)
    assert scenario.pathloss_exp == 2.0
    assert scenario.power_s == pytest.approx(1.0, rel=1e-15)
    assert scenario.power_r == pytest.approx(1.0, rel=1e-15)
    assert scenario.noise_power == pytest.approx(1e-12, rel=1e-15)
    assert scenario.element_spacing == 0.05 / 4


def test_to_scenario_overrides_split():
    cfg = ExperimentConfig()
    assert to_scenario(cfg, 64).split_ratio == 0.25
    assert to_scenario(cfg, 64, 0.4).split_ratio == 0.4


def test_config_round_trip_default():
    cfg = ExperimentConfig()
    assert parse_config(emit_config(cfg)) == cfg


def test_config_round_trip_customized():
    cfg = ExperimentConfig(
        half_distance=250.0,
        downtilt_rad=0.61,
        element_spacing=0.02,
        deployments=("near-r", "multi"),
        m_grid=(10, 20, 40),
        rho=0.3,
        rho_grid=(0.1, 0.3, 0.45),
        strategy="ascent",
        tau_db=(-5.0, 0.0, math.inf),
        trials=17,
        seed=99,
        output_path="out.csv",
        tau_link_overrides=(("I1-I2", math.inf), ("S-I1", 12.5)),
        panel_grids=(("I1", (2, 5)), ("I2", (4, 5))),
    )
    assert parse_config(emit_config(cfg)) == cfg


def test_config_parse_comments_and_spacing():
    text = """
# comment line
trials = 5   # trailing comment
seed=42
m_grid = 8, 16
"""
    cfg = parse_config(text)
    assert cfg.trials == 5 and cfg.seed == 42 and cfg.m_grid == (8, 16)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"deployments": ()},
        {"deployments": ("near-x",)},
        {"m_grid": ()},
        {"m_grid": (10, 10)},
        {"m_grid": (20, 10)},
        {"rho": 0.5},
        {"rho_grid": (0.0, 0.25)},
        {"strategy": "magic"},
        {"trials": 0},
        {"tau_db": (20.0, 10.0)},
    ],
)
def test_config_validation_errors(kwargs):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kwargs)


def test_parse_rejects_unknown_key():
    with pytest.raises(ConfigError):
        parse_config("not_a_field = 3\n")


def test_parse_rejects_malformed_line():
    with pytest.raises(ConfigError):
        parse_config("trials 5\n")
    with pytest.raises(ConfigError):
        parse_config("trials = five\n")
    with pytest.raises(ConfigError):
        parse_config("panel_grids = I1:3x3\n")
