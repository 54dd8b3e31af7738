"""Experiment configuration and its key=value text format.

Powers are configured in dBm and gains/Rician factors in dB, matching how
link budgets are usually quoted; everything is converted to linear once,
here, so the numerical modules only ever see watts and ratios.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .geometry import Deployment, Scenario

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "DEFAULT_M_GRID",
    "SCALING_M_GRID",
    "DEFAULT_RHO_SWEEP_GRID",
    "db_to_linear",
    "dbm_to_watts",
    "parse_config",
    "emit_config",
    "to_scenario",
]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


DEFAULT_M_GRID = (50, 100, 150, 200, 300, 500, 750, 1000, 1500, 2000)
SCALING_M_GRID = tuple(2**k for k in range(12, 19))
DEFAULT_RHO_SWEEP_GRID = tuple(round(0.01 * i, 10) for i in range(1, 50))

_DEPLOYMENT_VALUES = tuple(d.value for d in Deployment)
_STRATEGIES = ("closed-form", "ascent")


def db_to_linear(db: float) -> float:
    return math.inf if math.isinf(db) and db > 0 else 10.0 ** (db / 10.0)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment run: scenario parameters plus driver settings."""

    half_distance: float = 500.0
    relay_irs_altitude: float = 5.0
    end_irs_altitude: float = 4.0
    downtilt_rad: float = math.pi / 4
    wavelength: float = 0.05
    ref_gain_db: float = -30.0
    pathloss_exp: float = 2.0
    power_s_dbm: float = 30.0
    power_r_dbm: float = 30.0
    noise_dbm: float = -90.0
    element_spacing: float | None = None  # None means wavelength / 4
    deployments: tuple[str, ...] = _DEPLOYMENT_VALUES
    m_grid: tuple[int, ...] = DEFAULT_M_GRID
    rho: float = 0.25
    rho_grid: tuple[float, ...] = (0.25, 1 / 3)
    strategy: str = "closed-form"
    tau_db: tuple[float, ...] = (0.0, 10.0, 20.0, math.inf)
    trials: int = 1000
    seed: int = 1
    output_path: str = ""
    tau_link_overrides: tuple[tuple[str, float], ...] = ()
    panel_grids: tuple[tuple[str, tuple[int, int]], ...] = ()

    def __post_init__(self):
        if not self.deployments:
            raise ConfigError("deployments must not be empty")
        for dep in self.deployments:
            if dep not in _DEPLOYMENT_VALUES:
                raise ConfigError(f"unknown deployment {dep!r}")
        if self.strategy not in _STRATEGIES:
            raise ConfigError(f"strategy must be one of {_STRATEGIES}")
        for name in ("m_grid", "rho_grid", "tau_db"):
            grid = getattr(self, name)
            if not grid:
                raise ConfigError(f"{name} must not be empty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError(f"{name} must be strictly increasing")
        if any(m < 1 for m in self.m_grid):
            raise ConfigError("m_grid entries must be positive")
        if not 0.0 < self.rho < 0.5:
            raise ConfigError("rho must lie in (0, 0.5)")
        if any(not 0.0 < rho < 0.5 for rho in self.rho_grid):
            raise ConfigError("rho_grid entries must lie in (0, 0.5)")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")


def to_scenario(config: ExperimentConfig, m: int, rho: float | None = None) -> Scenario:
    """Linear-unit scenario for one grid point."""
    spacing = config.element_spacing
    if spacing is None:
        spacing = config.wavelength / 4.0
    return Scenario(
        half_distance=config.half_distance,
        relay_irs_altitude=config.relay_irs_altitude,
        end_irs_altitude=config.end_irs_altitude,
        downtilt=config.downtilt_rad,
        wavelength=config.wavelength,
        ref_gain=db_to_linear(config.ref_gain_db),
        pathloss_exp=config.pathloss_exp,
        power_s=dbm_to_watts(config.power_s_dbm),
        power_r=dbm_to_watts(config.power_r_dbm),
        noise_power=dbm_to_watts(config.noise_dbm),
        element_spacing=spacing,
        total_elements=int(m),
        split_ratio=config.rho if rho is None else rho,
    )


def tau_overrides_linear(config: ExperimentConfig) -> dict[str, float]:
    return {key: db_to_linear(value) for key, value in config.tau_link_overrides}


def panel_grids_dict(config: ExperimentConfig) -> dict[str, tuple[int, int]] | None:
    return dict(config.panel_grids) if config.panel_grids else None


# ---------------------------------------------------------------------------
# key=value serialization
# ---------------------------------------------------------------------------


def _fmt_scalar(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit_field(name: str, value) -> str:
    if name in ("deployments",):
        return ",".join(value)
    if name in ("m_grid", "rho_grid", "tau_db"):
        return ",".join(_fmt_scalar(v) for v in value)
    if name == "tau_link_overrides":
        return ",".join(f"{k}:{_fmt_scalar(v)}" for k, v in value)
    if name == "panel_grids":
        return ",".join(f"{k}={h}x{v}" for k, (h, v) in value)
    return _fmt_scalar(value)


def emit_config(config: ExperimentConfig) -> str:
    """Serialize to the key=value text format (one field per line)."""
    lines = []
    for f in dataclasses.fields(ExperimentConfig):
        lines.append(f"{f.name} = {_emit_field(f.name, getattr(config, f.name))}")
    return "\n".join(lines) + "\n"


def _parse_float(raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"expected a number, got {raw!r}") from exc


def _parse_int(raw: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"expected an integer, got {raw!r}") from exc


def _parse_field(name: str, raw: str):
    raw = raw.strip()
    if name in ("half_distance", "relay_irs_altitude", "end_irs_altitude", "downtilt_rad",
                "wavelength", "ref_gain_db", "pathloss_exp", "power_s_dbm", "power_r_dbm",
                "noise_dbm", "rho"):
        return _parse_float(raw)
    if name == "element_spacing":
        return None if raw.lower() == "none" else _parse_float(raw)
    if name in ("trials", "seed"):
        return _parse_int(raw)
    if name == "output_path":
        return raw
    if name == "strategy":
        return raw
    if name == "deployments":
        return tuple(part.strip() for part in raw.split(",") if part.strip())
    if name == "m_grid":
        return tuple(_parse_int(part) for part in raw.split(",") if part.strip())
    if name in ("rho_grid", "tau_db"):
        return tuple(_parse_float(part) for part in raw.split(",") if part.strip())
    if name == "tau_link_overrides":
        if not raw:
            return ()
        items = []
        for part in raw.split(","):
            key, _, value = part.partition(":")
            if not key or not value:
                raise ConfigError(f"bad link override {part!r}; use TX-RX:dB")
            items.append((key.strip(), _parse_float(value)))
        return tuple(items)
    if name == "panel_grids":
        if not raw:
            return ()
        items = []
        for part in raw.split(","):
            key, _, value = part.partition("=")
            h, _, v = value.partition("x")
            if not key or not h or not v:
                raise ConfigError(f"bad panel grid {part!r}; use LABEL=HxV")
            items.append((key.strip(), (_parse_int(h), _parse_int(v))))
        return tuple(items)
    raise ConfigError(f"unknown configuration key {name!r}")


def parse_config_items(text: str) -> dict:
    """Parse key=value lines (# starts a comment) into typed field values."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, sep, raw = stripped.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        values[key.strip()] = _parse_field(key.strip(), raw)
    return values


def parse_config(text: str) -> ExperimentConfig:
    try:
        return ExperimentConfig(**parse_config_items(text))
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
