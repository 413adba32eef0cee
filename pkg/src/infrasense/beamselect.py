"""Beam-pair candidate sets for exhaustive, position- and APS-assisted training."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from .phyarray import Channel, Codebook, beam_pair_responses, dbm_to_mw
from .scene import Pose
from .sensing import PositionEstimate, SpatialCovariance

SYMBOL_DURATION_S = 4.75e-6  # 4.17 us NR symbol at 240 kHz SCS + 0.58 us CP


class Strategy(Enum):
    EXHAUSTIVE = "exhaustive"
    POSITION_ASSISTED = "position"
    APS_ASSISTED = "aps"


@dataclass(frozen=True)
class CandidateSet:
    """Ordered (tx_beam, rx_beam) pairs to sweep.

    ``rx_parallel`` is the number of receive panels measured in the same
    symbol; rx beams ``j`` and ``j + k * beams_per_panel`` share a symbol.
    """

    pairs: tuple[tuple[int, int], ...]
    strategy: Strategy
    rx_parallel: int = 1
    rx_per_panel: int = 0
    degenerate: bool = False

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def symbol_count(self) -> int:
        if self.rx_parallel == 1 or not self.pairs:
            return len(self.pairs)
        return len({(t, r % self.rx_per_panel) for t, r in self.pairs})

    def tx_beams(self) -> list[int]:
        return list(dict.fromkeys(t for t, _ in self.pairs))


@dataclass(frozen=True)
class OverheadReport:
    pair_count: int
    symbol_duration_s: float
    training_time_s: float


def overhead(pair_count: int, symbol_duration_s: float = SYMBOL_DURATION_S) -> OverheadReport:
    if pair_count < 0:
        raise ValueError("pair count must be non-negative")
    return OverheadReport(int(pair_count), symbol_duration_s, pair_count * symbol_duration_s)


def _candidate_set(tx, rx, strategy, cb_rx: Codebook, degenerate=False) -> CandidateSet:
    pairs = tuple((int(t), int(r)) for t in tx for r in rx)
    return CandidateSet(pairs, strategy, cb_rx.num_arrays, cb_rx.beams_per_array, degenerate)


def exhaustive_candidates(cb_tx: Codebook, cb_rx: Codebook) -> CandidateSet:
    """Full Cartesian product, tx index outer."""
    return _candidate_set(range(len(cb_tx)), range(len(cb_rx)), Strategy.EXHAUSTIVE, cb_rx)


def circular_distance_to_interval(u, lo: float, hi: float, period):
    """Distance from ``u`` to [lo, hi] on a circle of circumference ``period``."""
    u = np.asarray(u, dtype=float)
    v = lo + np.mod(u - lo, period)
    return np.where(v <= hi, 0.0, np.minimum(v - hi, lo + period - v))


def sine_interval(az_lo: float, az_hi: float, boresight: float) -> tuple[float, float]:
    """Range of sin(az - boresight) over the azimuth interval [az_lo, az_hi]."""
    a, b = az_lo - boresight, az_hi - boresight
    values = [math.sin(a), math.sin(b)]
    for crit in (math.pi / 2, -math.pi / 2):
        k = math.ceil((a - crit) / (2 * math.pi))
        if crit + 2 * math.pi * k <= b:
            values.append(math.sin(crit))
    return min(values), max(values)


def _beam_distances(cb: Codebook, az_lo: float, az_hi: float, az_centre: float):
    """Per-beam sin-domain distance to the sector and to its centre direction."""
    to_sector = np.empty(len(cb))
    to_centre = np.empty(len(cb))
    for b in np.unique(cb.boresights):
        sel = cb.boresights == b
        lo, hi = sine_interval(az_lo, az_hi, float(b))
        uc = math.sin(az_centre - b)
        period = cb.periods[sel]
        to_sector[sel] = circular_distance_to_interval(cb.centers[sel], lo, hi, period)
        to_centre[sel] = circular_distance_to_interval(cb.centers[sel], uc, uc, period)
    return to_sector, to_centre


class Sector(NamedTuple):
    tx: tuple[float, float, float]   # (lo, hi, centre) azimuth at the RSU
    rx: tuple[float, float, float]   # (lo, hi, centre) azimuth at the vehicle
    degenerate: bool


def position_sectors(est: PositionEstimate, rsu_pose: Pose) -> Sector:
    """Azimuth sectors subtended by the uncertainty disk, seen from both ends."""
    d = np.asarray(est.reported) - rsu_pose.xy
    dist = float(np.hypot(*d))
    centre = math.atan2(d[1], d[0])
    if est.uncertainty_radius >= dist:
        full = (centre - math.pi, centre + math.pi, centre)
        return Sector(full, (centre, centre + 2 * math.pi, centre + math.pi), True)
    half = math.asin(est.uncertainty_radius / dist)
    back = centre + math.pi
    return Sector((centre - half, centre + half, centre), (back - half, back + half, back), False)


def _mainlobe_hits(cb: Codebook, sector) -> np.ndarray:
    to_sector, _ = _beam_distances(cb, *sector)
    # open mainlobe: a beam whose null falls exactly on the sector edge is out
    return np.flatnonzero(to_sector < cb.halfwidths - 1e-12)


def position_candidates(est: PositionEstimate, rsu_pose: Pose, ego_heading: float,
                        cb_tx: Codebook, cb_rx: Codebook) -> CandidateSet:
    """Beams whose null-to-null mainlobe overlaps the position sector, both ends.

    ``ego_heading`` is implicit in the rx codebook boresights and kept for
    call-site clarity. If the disk covers the RSU no pruning is possible and
    both codebooks are returned in full with ``degenerate`` set.
    """
    if not math.isfinite(est.uncertainty_radius):
        raise ValueError("uncertainty radius must be finite")
    sector = position_sectors(est, rsu_pose)
    if sector.degenerate:
        return _candidate_set(range(len(cb_tx)), range(len(cb_rx)),
                              Strategy.POSITION_ASSISTED, cb_rx, degenerate=True)
    return _candidate_set(_mainlobe_hits(cb_tx, sector.tx), _mainlobe_hits(cb_rx, sector.rx),
                          Strategy.POSITION_ASSISTED, cb_rx)


def _rx_symbols_per_tx(cb_rx: Codebook) -> int:
    return cb_rx.beams_per_array


def budget_position_candidates(est: PositionEstimate, rsu_pose: Pose, cb_tx: Codebook,
                               cb_rx: Codebook, budget_symbols: int) -> CandidateSet:
    """Position-ranked tx beams, truncated or padded to a symbol budget.

    Tx beams are ranked by sin-domain distance to the position sector, then
    to the reported direction, then by index; the top ``budget // n_rx`` are
    each swept against every rx beam.
    """
    k = _budget_tx_count(cb_rx, budget_symbols, len(cb_tx))
    sector = position_sectors(est, rsu_pose)
    to_sector, to_centre = _beam_distances(cb_tx, *sector.tx)
    # mirror-image beams are equidistant up to round-off; quantise so index decides
    order = np.lexsort((np.arange(len(cb_tx)), np.round(to_centre, 10), np.round(to_sector, 10)))
    return _candidate_set(order[:k], range(len(cb_rx)), Strategy.POSITION_ASSISTED, cb_rx,
                          sector.degenerate)


def _budget_tx_count(cb_rx: Codebook, budget_symbols: int, n_tx: int) -> int:
    per_tx = _rx_symbols_per_tx(cb_rx)
    if budget_symbols < per_tx:
        raise ValueError(f"budget {budget_symbols} is below one rx sweep ({per_tx} symbols)")
    return min(budget_symbols // per_tx, n_tx)


def beam_scores(r_comm: SpatialCovariance, cb_tx: Codebook) -> np.ndarray:
    """Beam-aligned covariance power f^H R f for every tx beam."""
    return np.real(np.sum(cb_tx.beams.conj() * (cb_tx.beams @ r_comm.r.T), axis=1))


def aps_candidates(r_comm: SpatialCovariance, cb_tx: Codebook, cb_rx: Codebook,
                   budget_symbols: int) -> CandidateSet:
    """Top ``budget // n_rx`` tx beams by covariance power, each against all rx beams."""
    k = _budget_tx_count(cb_rx, budget_symbols, len(cb_tx))
    scores = beam_scores(r_comm, cb_tx)
    top = scores.max()
    # scores within 1e-10 relative are ties, resolved by lower index
    quantised = np.round(scores / top, 10) if top > 0 else np.zeros_like(scores)
    order = np.lexsort((np.arange(len(cb_tx)), -quantised))
    return _candidate_set(order[:k], range(len(cb_rx)), Strategy.APS_ASSISTED, cb_rx)


class TrainingResult(NamedTuple):
    best_pair: tuple[int, int]
    measured_snr_db: float


def run_training(channel: Channel, candidates: CandidateSet, cb_tx: Codebook, cb_rx: Codebook,
                 tx_power_dbm: float = 30.0, noise_power_dbm: float = -84.0,
                 rng: Optional[np.random.Generator] = None, noisy: bool = False) -> TrainingResult:
    """Sweep the candidates and keep the pair with the largest measured SNR."""
    if not candidates.pairs:
        raise ValueError("empty candidate set")
    pairs = np.asarray(candidates.pairs)
    y = beam_pair_responses(channel, cb_tx, cb_rx)[pairs[:, 0], pairs[:, 1]]
    p_mw = dbm_to_mw(tx_power_dbm)
    n_mw = dbm_to_mw(noise_power_dbm)
    y = y * math.sqrt(p_mw)
    if noisy:
        rng = np.random.default_rng() if rng is None else rng
        noise = rng.standard_normal(len(y)) + 1j * rng.standard_normal(len(y))
        y = y + math.sqrt(n_mw / 2) * noise
    measured = np.abs(y) ** 2
    best = int(np.argmax(measured))
    with np.errstate(divide="ignore"):
        snr_db = float(10 * np.log10(measured[best] / n_mw))
    return TrainingResult((int(pairs[best, 0]), int(pairs[best, 1])), snr_db)
