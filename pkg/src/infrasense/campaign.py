"""Monte Carlo campaigns over urban-canyon drops.

Every trial derives its random streams from ``SeedSequence(seed,
spawn_key=(trial, attempt, stream))``, so results depend only on the
campaign seed and the trial index, never on scheduling.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import binomtest

from .beamselect import (CandidateSet, aps_candidates, budget_position_candidates,
                         exhaustive_candidates, overhead, position_candidates, run_training)
from .config import ExperimentConfig, StrategyConfig
from .phyarray import (AnyArray, ArrayGroup, Codebook, Ula, assemble_channel, beam_pair_gains,
                       dft_codebook, wrap_angle)
from .raytrace import ChannelState, Path, classify_state, trace_paths
from .scene import Scene, build_scene
from .sensing import (Aps, TargetTooWeakError, aps_similarity, estimate_aps, gnss_estimate,
                      passive_radar_covariance, path_covariance, rsu_radar_estimate, translate_aps)

log = logging.getLogger(__name__)

STREAM_SCENE, STREAM_COMM, STREAM_GNSS, STREAM_RADAR, STREAM_PASSIVE, STREAM_NOISE = range(6)


class DropSamplingError(RuntimeError):
    """No acceptable drop within the resample cap."""


def sig6(x: float) -> float:
    """Round to six significant digits, the precision results are reported at."""
    if not math.isfinite(x):
        return float(x)
    return float(f"{x:.6g}")


def stream(seed: int, trial: int, attempt: int, which: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial, attempt, which)))


def drop_seed(seed: int, trial: int, attempt: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(trial, attempt, STREAM_SCENE))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class Drop:
    trial: int
    attempt: int
    seed: int
    scene: Scene
    comm_paths: list[Path]
    state: ChannelState

    @property
    def range_m(self) -> float:
        return self.scene.ego_range()


def draw_drop(cfg: ExperimentConfig, trial: int) -> Drop:
    """First drop for ``trial`` meeting the ensemble and range filters.

    Drops without any propagation path are rejected as well, since no beam
    pair is meaningful there.
    """
    for attempt in range(cfg.max_resamples):
        seed = drop_seed(cfg.seed, trial, attempt)
        scene = build_scene(dataclasses.replace(cfg.scene, seed=seed))
        if not cfg.min_range_m <= scene.ego_range() <= cfg.max_range_m:
            continue
        paths = trace_paths(scene, scene.rsu_pose, scene.ego_array_pose, cfg.comm.carrier_hz,
                            stream(cfg.seed, trial, attempt, STREAM_COMM))
        if not paths:
            continue
        state = classify_state(paths)
        if cfg.ensemble == "los" and state is not ChannelState.LOS:
            continue
        if cfg.ensemble == "nlos" and state is not ChannelState.NLOS:
            continue
        if attempt:
            log.debug("trial %d accepted after %d resamples", trial, attempt)
        return Drop(trial, attempt, seed, scene, paths, state)
    raise DropSamplingError(f"trial {trial}: no {cfg.ensemble} drop in {cfg.max_resamples} attempts")


def rsu_array(cfg: ExperimentConfig, scene: Scene) -> Ula:
    return Ula(cfg.comm.n_tx, cfg.comm.spacing_wavelengths, scene.rsu_pose.boresight)


def vehicle_array(cfg: ExperimentConfig, scene: Scene) -> AnyArray:
    comm = cfg.comm
    heading = scene.ego_heading
    if comm.rx_panels == 1:
        return Ula(comm.n_rx, comm.spacing_wavelengths, heading)
    group = ArrayGroup.panels(comm.n_rx, heading, comm.rx_panels, comm.spacing_wavelengths)
    if comm.rx_array_mode == "union":
        return group
    d = scene.rsu_pose.xy - scene.ego_array_pose.xy
    toward = math.atan2(d[1], d[0])
    offsets = [abs(wrap_angle(toward - a.boresight)) for a in group.arrays]
    best = group.arrays[int(np.argmin(offsets))]
    return ArrayGroup((best,), heading)


@dataclass(frozen=True)
class StrategyOutcome:
    strategy: str
    chosen: tuple[int, int]
    truth: tuple[int, int]
    success: bool
    pairs: int
    snr_gap_db: float
    fallback: bool = False


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    drop_seed: int
    attempts: int
    state: str
    range_m: float
    outcomes: tuple[StrategyOutcome, ...]


@dataclass(frozen=True)
class StrategySummary:
    strategy: str
    trials: int
    success_pct: float
    mean_pairs: float
    mean_time_ms: float
    mean_snr_gap_db: float
    success_ci_low: float
    success_ci_high: float


@dataclass(frozen=True)
class CampaignResult:
    seed: int
    summaries: tuple[StrategySummary, ...]
    records: tuple[TrialRecord, ...]

    def summary(self, strategy: str) -> StrategySummary:
        for s in self.summaries:
            if s.strategy == strategy:
                return s
        raise KeyError(strategy)


class _TrialContext:
    """Arrays, codebooks and channel shared by all strategies of one trial."""

    def __init__(self, cfg: ExperimentConfig, drop: Drop):
        self.cfg = cfg
        self.drop = drop
        self.scene = drop.scene
        self.tx = rsu_array(cfg, drop.scene)
        self.rx = vehicle_array(cfg, drop.scene)
        self.cb_tx = dft_codebook(self.tx)
        self.cb_rx = dft_codebook(self.rx)
        self.channel = assemble_channel(drop.comm_paths, self.tx, self.rx, cfg.comm.carrier_hz)
        gains = beam_pair_gains(self.channel, self.cb_tx, self.cb_rx)
        self.gains = gains
        flat = int(np.argmax(gains))
        self.truth = (flat // gains.shape[1], flat % gains.shape[1])
        self._radar_cov = None

    def rng(self, which: int) -> np.random.Generator:
        return stream(self.cfg.seed, self.drop.trial, self.drop.attempt, which)

    def radar_aps(self) -> Aps:
        cfg = self.cfg.passive
        if self._radar_cov is None:
            array = Ula(cfg.n_antennas, 0.5, self.scene.rsu_pose.boresight)
            self._radar_cov = passive_radar_covariance(
                self.scene, self.scene.ego_radar_pose, array, cfg.carrier_hz,
                self.rng(STREAM_PASSIVE), cfg.snapshots, cfg.eirp_dbm, cfg.effective_noise_dbm)
        return estimate_aps(self._radar_cov, cfg.grid_size)

    def comm_aps(self) -> Aps:
        cov = path_covariance(self.drop.comm_paths, self.tx, self.cfg.comm.carrier_hz, side="tx")
        return estimate_aps(cov, self.cfg.passive.grid_size)

    def candidates(self, strategy: StrategyConfig) -> tuple[CandidateSet, bool]:
        cfg = self.cfg
        if strategy.name == "exhaustive":
            return exhaustive_candidates(self.cb_tx, self.cb_rx), False
        if strategy.name == "aps":
            r_comm = translate_aps(self.radar_aps(), self.tx, cfg.comm.carrier_hz)
            return aps_candidates(r_comm, self.cb_tx, self.cb_rx, cfg.budget_symbols), False
        true_pos = self.scene.ego_array_pose.xy
        if strategy.source == "gnss":
            est = gnss_estimate(true_pos, strategy.gnss_radius_m, self.rng(STREAM_GNSS))
        else:
            try:
                est = rsu_radar_estimate(cfg.radar, true_pos, self.scene.rsu_pose,
                                         self.rng(STREAM_RADAR))
            except (TargetTooWeakError, ValueError):
                return dataclasses.replace(exhaustive_candidates(self.cb_tx, self.cb_rx),
                                           degenerate=True), True
        if strategy.budget:
            cands = budget_position_candidates(est, self.scene.rsu_pose, self.cb_tx, self.cb_rx,
                                               cfg.budget_symbols)
        else:
            cands = position_candidates(est, self.scene.rsu_pose, self.scene.ego_heading,
                                        self.cb_tx, self.cb_rx)
        return cands, cands.degenerate

    def evaluate(self, strategy: StrategyConfig) -> StrategyOutcome:
        cfg = self.cfg
        cands, fallback = self.candidates(strategy)
        result = run_training(self.channel, cands, self.cb_tx, self.cb_rx, cfg.comm.tx_power_dbm,
                              cfg.comm.noise_power_dbm, self.rng(STREAM_NOISE), cfg.noisy_training)
        chosen = result.best_pair
        success = chosen == self.truth
        if success:
            gap = 0.0
        else:
            gap = 10 * math.log10(self.gains[self.truth] / self.gains[chosen]) \
                if self.gains[chosen] > 0 else math.inf
        return StrategyOutcome(strategy.label, chosen, self.truth, success, cands.symbol_count,
                               sig6(gap), fallback)


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialRecord:
    drop = draw_drop(cfg, trial)
    ctx = _TrialContext(cfg, drop)
    outcomes = tuple(ctx.evaluate(s) for s in cfg.strategies)
    return TrialRecord(trial, drop.seed, drop.attempt + 1, drop.state.value,
                       sig6(drop.range_m), outcomes)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def summarise(cfg: ExperimentConfig, records: Sequence[TrialRecord]) -> tuple[StrategySummary, ...]:
    out = []
    for i, strategy in enumerate(cfg.strategies):
        rows = [r.outcomes[i] for r in records]
        n = len(rows)
        wins = sum(o.success for o in rows)
        mean_pairs = sum(o.pairs for o in rows) / n
        lo, hi = wilson_interval(wins, n)
        out.append(StrategySummary(
            strategy.label, n, sig6(100.0 * wins / n), sig6(mean_pairs),
            sig6(overhead(1, cfg.comm.symbol_duration_s).training_time_s * mean_pairs * 1e3),
            sig6(float(np.mean([o.snr_gap_db for o in rows]))),
            sig6(100.0 * lo), sig6(100.0 * hi)))
    return tuple(out)


def run_campaign(cfg: ExperimentConfig, threads: int = 1,
                 trials: Optional[Sequence[int]] = None) -> CampaignResult:
    """Run every trial; records come back ordered by trial index."""
    indices = list(range(cfg.trials)) if trials is None else list(trials)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda t: run_trial(cfg, t), indices))
    else:
        records = [run_trial(cfg, t) for t in indices]
    resamples = sum(r.attempts - 1 for r in records)
    if resamples:
        log.info("%d drops resampled to meet the %s ensemble", resamples, cfg.ensemble)
    return CampaignResult(cfg.seed, summarise(cfg, records), tuple(records))


@dataclass(frozen=True)
class OverheadRow:
    strategy: str
    pair_count: float
    training_time_ms: float


def overhead_rows(pair_counts: dict[str, float], symbol_duration_s: float = 4.75e-6) -> list[OverheadRow]:
    return [OverheadRow(name, sig6(count), sig6(count * symbol_duration_s * 1e3))
            for name, count in pair_counts.items()]


def overhead_table(cfg: ExperimentConfig, threads: int = 1) -> tuple[list[OverheadRow], CampaignResult]:
    """Mean pair counts of each strategy over a drop sweep, as training time."""
    result = run_campaign(cfg, threads)
    counts = {s.strategy: s.mean_pairs for s in result.summaries}
    return overhead_rows(counts, cfg.comm.symbol_duration_s), result


@dataclass(frozen=True)
class ApsComparison:
    trial: int
    range_m: float
    offset_steps: int
    correlation: float


def aps_pair(cfg: ExperimentConfig, trial: int) -> tuple[Drop, Aps, Aps]:
    """(drop, radar-derived APS, comm-channel APS) for one trial."""
    drop = draw_drop(cfg, trial)
    ctx = _TrialContext(cfg, drop)
    return drop, ctx.radar_aps(), ctx.comm_aps()


def aps_similarity_study(cfg: ExperimentConfig, threads: int = 1) -> list[ApsComparison]:
    def one(trial: int) -> ApsComparison:
        drop, radar, comm = aps_pair(cfg, trial)
        offset, corr = aps_similarity(radar, comm)
        return ApsComparison(trial, drop.range_m, int(round(offset / radar.step)), corr)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(cfg.trials)))
    return [one(t) for t in range(cfg.trials)]
