import dataclasses
import math
from pathlib import Path

import pytest

from infrasense.config import (PRESETS, CommConfig, ConfigError, ExperimentConfig,
                               PassiveRadarConfig, StrategyConfig, aps_demo_config, campaign_config,
                               config_from_dict, config_to_dict, load_config, overhead_config)

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def test_campaign_defaults():
    cfg = campaign_config()
    assert (cfg.comm.n_tx, cfg.comm.n_rx, cfg.comm.rx_panels) == (128, 16, 4)
    assert cfg.trials == 1000 and cfg.ensemble == "nlos" and cfg.budget_symbols == 560
    assert [s.label for s in cfg.strategies] == ["exhaustive", "position-gnss", "aps"]


def test_overhead_preset():
    cfg = overhead_config()
    assert (cfg.comm.n_tx, cfg.comm.n_rx, cfg.comm.rx_panels) == (64, 16, 1)
    assert [s.label for s in cfg.strategies] == ["exhaustive", "gnss", "rsu-radar"]
    assert not any(s.budget for s in cfg.strategies if s.name == "position")
    assert (cfg.trials, cfg.ensemble, cfg.min_range_m, cfg.max_range_m) == (500, "los", 15.0, 60.0)


def test_passive_link_budget():
    p = PassiveRadarConfig()
    assert p.eirp_dbm == 20.0 and p.effective_noise_dbm == -102.0


@pytest.mark.parametrize("make", [
    lambda: CommConfig(n_tx=0), lambda: CommConfig(rx_array_mode="mixed"),
    lambda: PassiveRadarConfig(snapshots=0), lambda: StrategyConfig("random"),
    lambda: StrategyConfig("position", source="lidar"), lambda: ExperimentConfig(trials=0),
    lambda: ExperimentConfig(ensemble="rain"), lambda: ExperimentConfig(seed=-1),
    lambda: ExperimentConfig(seed=2 ** 64), lambda: ExperimentConfig(min_range_m=50, max_range_m=10),
    lambda: ExperimentConfig(budget_symbols=8),
    lambda: ExperimentConfig(strategies=(StrategyConfig("aps"), StrategyConfig("aps"))),
])
def test_invalid_configs_raise(make):
    with pytest.raises(ConfigError):
        make()


def test_dict_layering_keeps_unspecified_fields():
    cfg = config_from_dict({"scene": {"vehicle_count": 12}, "trials": 7}, overhead_config())
    assert cfg.scene.vehicle_count == 12 and cfg.scene.lane_count == 4
    assert cfg.trials == 7 and cfg.comm.n_tx == 64


@pytest.mark.parametrize("data", [
    {"tirals": 3}, {"scene": {"lanes": 2}}, {"strategies": [{"name": "aps", "k": 3}]},
    {"strategies": "aps"}, [1, 2],
])
def test_unknown_or_malformed_keys(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_round_trip_through_dict():
    for make in PRESETS.values():
        cfg = make()
        assert config_from_dict(config_to_dict(cfg)) == cfg


def test_infinite_range_serialises_and_loads(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("max_range_m: .inf\nstrategies:\n  - {name: exhaustive}\n")
    cfg = load_config(p)
    assert cfg.max_range_m == math.inf and len(cfg.strategies) == 1


def test_bad_yaml(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("trials: [1,\n")
    with pytest.raises(ConfigError):
        load_config(p)


@pytest.mark.parametrize("name,make", [("campaign", campaign_config), ("overhead", overhead_config),
                                       ("aps_demo", aps_demo_config)])
def test_shipped_configs_equal_presets(name, make):
    assert load_config(CONFIG_DIR / f"{name}.yaml", make()) == make()
    assert dataclasses.replace(make()) == make()
