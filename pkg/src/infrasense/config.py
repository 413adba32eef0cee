"""Experiment configuration: dataclasses, YAML loading and the two stock setups."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from .scene import SceneConfig
from .sensing import RadarSpec

ENSEMBLES = ("any", "los", "nlos")
STRATEGY_NAMES = ("exhaustive", "position", "aps")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CommConfig:
    n_tx: int = 128
    n_rx: int = 16
    rx_panels: int = 4
    rx_array_mode: str = "union"
    carrier_hz: float = 73e9
    tx_power_dbm: float = 30.0
    noise_power_dbm: float = -84.0
    spacing_wavelengths: float = 0.5
    symbol_duration_s: float = 4.75e-6

    def __post_init__(self):
        if self.n_tx < 1 or self.n_rx < 1 or self.rx_panels < 1:
            raise ConfigError("array sizes and panel count must be positive")
        if self.rx_array_mode not in ("union", "best_facing"):
            raise ConfigError(f"rx_array_mode must be 'union' or 'best_facing', got {self.rx_array_mode!r}")
        if self.carrier_hz <= 0 or self.symbol_duration_s <= 0:
            raise ConfigError("carrier and symbol duration must be positive")


@dataclass(frozen=True)
class PassiveRadarConfig:
    """Receive-only RSU array listening to the ego's automotive radar.

    ``noise_power_dbm`` is thermal noise over the radar bandwidth (250 MHz,
    12 dB noise figure); ``processing_gain_db`` is the coherent gain of
    correlating one chirp against its known waveform.
    """

    carrier_hz: float = 76e9
    n_antennas: int = 128
    tx_power_dbm: float = 10.0
    antenna_gain_dbi: float = 10.0
    noise_power_dbm: float = -78.0
    processing_gain_db: float = 24.0
    snapshots: int = 64
    grid_size: int = 512

    @property
    def eirp_dbm(self) -> float:
        return self.tx_power_dbm + self.antenna_gain_dbi

    @property
    def effective_noise_dbm(self) -> float:
        return self.noise_power_dbm - self.processing_gain_db

    def __post_init__(self):
        if self.snapshots < 1:
            raise ConfigError("passive radar needs at least one snapshot")
        if self.n_antennas < 1 or self.grid_size < 2:
            raise ConfigError("passive array size and APS grid must be positive")


@dataclass(frozen=True)
class StrategyConfig:
    name: str
    source: str = "gnss"
    gnss_radius_m: float = 5.0
    budget: bool = True
    label: str = ""

    def __post_init__(self):
        if self.name not in STRATEGY_NAMES:
            raise ConfigError(f"unknown strategy {self.name!r}; expected one of {STRATEGY_NAMES}")
        if self.source not in ("gnss", "radar"):
            raise ConfigError(f"position source must be 'gnss' or 'radar', got {self.source!r}")
        if not self.label:
            label = self.name if self.name != "position" else f"position-{self.source}"
            object.__setattr__(self, "label", label)


@dataclass(frozen=True)
class ExperimentConfig:
    scene: SceneConfig = field(default_factory=SceneConfig)
    comm: CommConfig = field(default_factory=CommConfig)
    radar: RadarSpec = field(default_factory=RadarSpec)
    passive: PassiveRadarConfig = field(default_factory=PassiveRadarConfig)
    strategies: tuple[StrategyConfig, ...] = (
        StrategyConfig("exhaustive"), StrategyConfig("position"), StrategyConfig("aps"))
    trials: int = 1000
    seed: int = 0
    noisy_training: bool = False
    budget_symbols: int = 560
    ensemble: str = "nlos"
    min_range_m: float = 0.0
    max_range_m: float = math.inf
    max_resamples: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.ensemble not in ENSEMBLES:
            raise ConfigError(f"ensemble must be one of {ENSEMBLES}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.min_range_m > self.max_range_m:
            raise ConfigError("min_range_m exceeds max_range_m")
        if self.max_resamples < 1:
            raise ConfigError("max_resamples must be at least 1")
        labels = [s.label for s in self.strategies]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"duplicate strategy labels: {labels}")
        needs_budget = any(s.name == "aps" or (s.name == "position" and s.budget)
                           for s in self.strategies)
        if needs_budget and self.budget_symbols < self.comm.n_rx:
            raise ConfigError("budget_symbols is smaller than one receive sweep")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def campaign_config(**overrides) -> ExperimentConfig:
    """NLOS strategy comparison: 128-element RSU, four 16-element roof panels."""
    return ExperimentConfig(**overrides)


def overhead_config(**overrides) -> ExperimentConfig:
    """LOS overhead sweep: 64-element RSU, one 16-element vehicle array."""
    base = dict(
        comm=CommConfig(n_tx=64, n_rx=16, rx_panels=1),
        strategies=(StrategyConfig("exhaustive"),
                    StrategyConfig("position", source="gnss", budget=False, label="gnss"),
                    StrategyConfig("position", source="radar", budget=False, label="rsu-radar")),
        trials=500, ensemble="los", min_range_m=15.0, max_range_m=60.0)
    base.update(overrides)
    return ExperimentConfig(**base)


def aps_demo_config(**overrides) -> ExperimentConfig:
    """LOS radar-vs-comm APS comparison on a two-lane street.

    The RSU sits on the centre line, so the bumper-to-roof offset biases the
    radar direction the same way in both lanes.
    """
    street = SceneConfig(lane_count=2, vehicle_count=15, rsu_lateral=0.0)
    base = dict(scene=street, strategies=(StrategyConfig("exhaustive"), StrategyConfig("aps")),
                trials=200, ensemble="los", min_range_m=30.0, max_range_m=60.0)
    base.update(overrides)
    return ExperimentConfig(**base)


PRESETS = {"campaign": campaign_config, "overhead": overhead_config, "aps-demo": aps_demo_config}


def _section(cls, data: Any, where: str):
    if data is None:
        return cls()
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where}: expected a mapping")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    try:
        return cls(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(data: Mapping, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    """Build a config, layering ``data`` over ``base`` section by section."""
    base = base or ExperimentConfig()
    if not isinstance(data, Mapping):
        raise ConfigError("config root must be a mapping")
    sections = {"scene": SceneConfig, "comm": CommConfig, "radar": RadarSpec,
                "passive": PassiveRadarConfig}
    top = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(data) - top)
    if unknown:
        raise ConfigError(f"unknown top-level keys {unknown}")
    changes: dict[str, Any] = {}
    for key, cls in sections.items():
        if key in data:
            merged = {**dataclasses.asdict(getattr(base, key)), **(data[key] or {})} \
                if isinstance(data[key], Mapping) else data[key]
            changes[key] = _section(cls, merged, key)
    if "strategies" in data:
        items = data["strategies"]
        if not isinstance(items, list):
            raise ConfigError("strategies must be a list")
        changes["strategies"] = tuple(_section(StrategyConfig, s, f"strategies[{i}]")
                                      for i, s in enumerate(items))
    for key in top - set(sections) - {"strategies"}:
        if key in data:
            value = data[key]
            if key in ("min_range_m", "max_range_m") and isinstance(value, str):
                value = float(value)
            changes[key] = value
    try:
        return dataclasses.replace(base, **changes)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data, base)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = dataclasses.asdict(cfg)
    out["scene"]["vehicle_dims"] = list(cfg.scene.vehicle_dims)
    out["strategies"] = [dataclasses.asdict(s) for s in cfg.strategies]
    return out
