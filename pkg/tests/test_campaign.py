import dataclasses
import math

import numpy as np
import pytest

from infrasense.campaign import (DropSamplingError, aps_similarity_study, draw_drop, drop_seed,
                                 overhead_rows, run_campaign, run_trial, sig6, wilson_interval)
from infrasense.config import CommConfig, ExperimentConfig, PassiveRadarConfig, StrategyConfig
from infrasense.scene import InfeasibleDropError, SceneConfig


def small(**changes):
    base = dict(comm=CommConfig(n_tx=32, n_rx=8, rx_panels=4),
                passive=PassiveRadarConfig(n_antennas=32, grid_size=128, snapshots=16),
                strategies=(StrategyConfig("exhaustive"), StrategyConfig("position"),
                            StrategyConfig("aps")),
                trials=12, seed=5, ensemble="any", budget_symbols=64)
    base.update(changes)
    return ExperimentConfig(**base)


def test_exhaustive_always_succeeds():
    res = run_campaign(small(strategies=(StrategyConfig("exhaustive"),)))
    s = res.summary("exhaustive")
    assert s.success_pct == 100.0 and s.mean_snr_gap_db == 0.0 and s.trials == 12
    assert s.mean_pairs == 32 * 8  # four panels share each symbol


def test_same_seed_same_result_and_thread_invariance():
    cfg = small()
    assert run_campaign(cfg) == run_campaign(cfg) == run_campaign(cfg, threads=4)


def test_trial_depends_only_on_seed_and_index():
    cfg = small()
    full = run_campaign(cfg)
    assert run_trial(cfg, 7) == full.records[7]
    assert run_campaign(cfg, trials=[7]).records[0] == full.records[7]


def test_gap_zero_iff_success():
    res = run_campaign(small(trials=20))
    for rec in res.records:
        for o in rec.outcomes:
            assert o.snr_gap_db >= 0
            assert (o.snr_gap_db == 0) == o.success


def test_pruned_strategies_respect_budget():
    res = run_campaign(small())
    for rec in res.records:
        for o in rec.outcomes[1:]:
            assert o.pairs <= 64


def test_huge_gnss_radius_degenerates_to_exhaustive():
    cfg = small(strategies=(StrategyConfig("exhaustive"),
                            StrategyConfig("position", gnss_radius_m=1e4, budget=False)))
    res = run_campaign(cfg)
    assert res.summary("position-gnss").success_pct == 100.0
    assert all(r.outcomes[1].fallback for r in res.records)


@pytest.mark.parametrize("ensemble", ["los", "nlos"])
def test_ensemble_filter(ensemble):
    cfg = small(ensemble=ensemble, trials=6)
    assert all(r.state.lower() == ensemble for r in run_campaign(cfg).records)


def test_range_window():
    cfg = small(min_range_m=20.0, max_range_m=40.0, trials=6)
    assert all(20.0 <= r.range_m <= 40.0 for r in run_campaign(cfg).records)


def test_impossible_window_raises():
    cfg = small(min_range_m=900.0, max_range_m=1000.0, max_resamples=5)
    with pytest.raises(DropSamplingError):
        draw_drop(cfg, 0)


def test_infeasible_scene_propagates():
    cfg = small(scene=SceneConfig(vehicle_count=200, lane_count=1))
    with pytest.raises(InfeasibleDropError):
        run_campaign(cfg)


def test_drop_seed_is_stable():
    assert drop_seed(0, 3, 0) == drop_seed(0, 3, 0)
    assert len({drop_seed(0, t, a) for t in range(20) for a in range(3)}) == 60


@pytest.mark.parametrize("k,n", [(0, 10), (7, 10), (834, 1000), (1000, 1000)])
def test_wilson_closed_form(k, n):
    z = 1.959963984540054
    p = k / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    lo, hi = wilson_interval(k, n)
    assert lo == pytest.approx(max(0.0, centre - half), abs=1e-12)
    assert hi == pytest.approx(min(1.0, centre + half), abs=1e-12)


def test_overhead_rows():
    rows = overhead_rows({"gnss": 475.0, "exhaustive": 1024.0})
    assert rows[0].training_time_ms == 2.25625
    assert rows[1].training_time_ms == 4.864


def test_sig6():
    assert sig6(1 / 3) == 0.333333 and sig6(123456789.0) == 123457000.0
    assert sig6(math.inf) == math.inf


def test_aps_study_reports_integer_offsets():
    cfg = small(ensemble="los", trials=4)
    study = aps_similarity_study(cfg)
    assert [c.trial for c in study] == [0, 1, 2, 3]
    assert all(isinstance(c.offset_steps, int) and -1 <= c.correlation <= 1 for c in study)
    assert study == aps_similarity_study(cfg, threads=3)
