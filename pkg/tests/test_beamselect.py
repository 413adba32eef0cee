import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from infrasense.beamselect import (SYMBOL_DURATION_S, CandidateSet, Strategy, aps_candidates,
                                   beam_scores, budget_position_candidates,
                                   circular_distance_to_interval, exhaustive_candidates, overhead,
                                   position_candidates, run_training, sine_interval)
from infrasense.phyarray import (ArrayGroup, Ula, assemble_channel, beam_pair_gains, dft_codebook,
                                 steering_vector)
from infrasense.raytrace import Path, PathKind
from infrasense.scene import Pose
from infrasense.sensing import PositionEstimate, PositionSource, SpatialCovariance

from conftest import on_grid_angle

RSU = Pose((0.0, 0.0, 5.0), 0.0)


def estimate(xy, radius, source=PositionSource.GNSS):
    return PositionEstimate(tuple(xy), radius, source)


def codebooks(n_tx=64, n_rx=16, heading=math.pi):
    return dft_codebook(Ula(n_tx)), dft_codebook(Ula(n_rx, boresight=heading))


def brute_force_hits(cb, az_lo, az_hi, samples=20001):
    """Beams whose open mainlobe contains some direction of a densely sampled sector."""
    az = np.linspace(az_lo, az_hi, samples)
    hits = set()
    for k in range(len(cb)):
        u = np.sin(az - cb.boresights[k])
        d = np.abs(np.remainder(u - cb.centers[k] + cb.periods[k] / 2, cb.periods[k]) - cb.periods[k] / 2)
        if np.any(d < cb.halfwidths[k]):
            hits.add(k)
    return hits


# --- exhaustive ---------------------------------------------------------------

@pytest.mark.parametrize("n_tx,n_rx", [(64, 16), (1, 1), (128, 16)])
def test_exhaustive_counts_and_order(n_tx, n_rx):
    cb_t, cb_r = codebooks(n_tx, n_rx)
    cs = exhaustive_candidates(cb_t, cb_r)
    assert len(cs) == cs.symbol_count == n_tx * n_rx
    assert list(cs.pairs) == [(t, r) for t in range(n_tx) for r in range(n_rx)]
    assert cs.strategy is Strategy.EXHAUSTIVE


def test_union_rx_symbols_count_parallel_panels_once():
    cb_t, cb_r = dft_codebook(Ula(128)), dft_codebook(ArrayGroup.panels(16, 0.0))
    cs = exhaustive_candidates(cb_t, cb_r)
    assert len(cs) == 8192
    assert cs.symbol_count == 2048


# --- position-assisted -----------------------------------------------------------

def test_zero_uncertainty_on_grid_is_single_pair():
    u = 0.25  # tx bin 8 of 64, rx bin 2 of 16 at half-wavelength spacing
    az = math.asin(u)
    cb_t, cb_r = codebooks()
    cs = position_candidates(estimate((30 * math.cos(az), 30 * math.sin(az)), 0.0), RSU, math.pi, cb_t, cb_r)
    assert cs.pairs == ((8, 2),)
    assert not cs.degenerate


@pytest.mark.parametrize("xy,radius", [((30.0, 0.0), 5.0), ((25.0, 12.0), 5.0), ((40.0, -20.0), 2.0)])
def test_position_sector_matches_brute_force(xy, radius):
    cb_t, cb_r = codebooks()
    cs = position_candidates(estimate(xy, radius), RSU, math.pi, cb_t, cb_r)
    centre = math.atan2(xy[1], xy[0])
    half = math.asin(radius / math.hypot(*xy))
    assert set(cs.tx_beams()) == brute_force_hits(cb_t, centre - half, centre + half)
    rx = {r for _, r in cs.pairs}
    assert rx == brute_force_hits(cb_r, centre + math.pi - half, centre + math.pi + half)


def test_five_metre_disk_at_thirty_metres():
    cb_t, cb_r = codebooks()
    cs = position_candidates(estimate((30.0, 0.0), 5.0), RSU, math.pi, cb_t, cb_r)
    # half-angle asin(1/6) spans 2 sin(9.59 deg) = 0.333 of sin space; beams are 1/32 apart
    assert 12 <= len(cs.tx_beams()) <= 13


def test_sub_metre_radius_prunes_more_than_gnss():
    cb_t, cb_r = codebooks()
    fine = position_candidates(estimate((30.0, 5.0), 0.3, PositionSource.RSU_RADAR), RSU, math.pi, cb_t, cb_r)
    coarse = position_candidates(estimate((30.0, 5.0), 5.0), RSU, math.pi, cb_t, cb_r)
    assert len(fine) <= 64
    assert len(fine) < len(coarse)


def test_disk_covering_rsu_is_degenerate():
    cb_t, cb_r = codebooks()
    cs = position_candidates(estimate((3.0, 1.0), 5.0), RSU, math.pi, cb_t, cb_r)
    assert cs.degenerate and len(cs) == 64 * 16


def test_infinite_radius_rejected():
    cb_t, cb_r = codebooks()
    with pytest.raises(ValueError):
        position_candidates(estimate((30.0, 0.0), math.inf), RSU, math.pi, cb_t, cb_r)


@given(st.floats(-1.2, 1.2), st.floats(10.0, 80.0), st.floats(0.0, 9.0), st.floats(0.0, 9.0))
def test_position_candidates_monotone_in_radius(bearing, dist, r1, r2):
    small, large = sorted((r1, r2))
    assume(large < dist)
    cb_t, cb_r = codebooks(32, 8)
    xy = (dist * math.cos(bearing), dist * math.sin(bearing))
    a = position_candidates(estimate(xy, small), RSU, math.pi, cb_t, cb_r)
    b = position_candidates(estimate(xy, large), RSU, math.pi, cb_t, cb_r)
    assert set(a.pairs) <= set(b.pairs)


def test_budget_position_ranks_sector_first():
    cb_t, cb_r = codebooks()
    cs = budget_position_candidates(estimate((30.0, 0.0), 0.0), RSU, cb_t, cb_r, 560)
    assert len(cs.tx_beams()) == 35 and len(cs) == 560
    assert cs.tx_beams()[0] == 0
    # nearest neighbours in sin space follow, lower index breaking ties
    assert cs.tx_beams()[1:3] == [1, 63]


# --- APS-assisted ------------------------------------------------------------------

def test_aps_budget_560_gives_35_tx_beams():
    cb_t, cb_r = codebooks()
    r = SpatialCovariance(np.eye(64, dtype=complex), 73e9, Ula(64))
    cs = aps_candidates(r, cb_t, cb_r, 560)
    assert len(cs) == 560 and cs.symbol_count == 560
    assert cs.tx_beams() == list(range(35))  # flat scores tie, lower index wins


def test_aps_rank_one_puts_aligned_beam_first():
    cb_t, cb_r = codebooks()
    a = steering_vector(Ula(64), on_grid_angle(41, 64))
    r = SpatialCovariance(np.outer(a, a.conj()), 73e9, Ula(64))
    cs = aps_candidates(r, cb_t, cb_r, 560)
    assert cs.tx_beams()[0] == 41
    assert beam_scores(r, cb_t)[41] == pytest.approx(64.0)


def test_aps_budget_below_one_rx_sweep():
    cb_t, cb_r = codebooks()
    r = SpatialCovariance(np.eye(64, dtype=complex), 73e9, Ula(64))
    with pytest.raises(ValueError):
        aps_candidates(r, cb_t, cb_r, 15)


@given(st.integers(16, 3000), st.integers(0, 2 ** 32))
def test_aps_budget_law(budget, seed):
    cb_t, cb_r = codebooks()
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((64, 3)) + 1j * rng.standard_normal((64, 3))
    cs = aps_candidates(SpatialCovariance(x @ x.conj().T, 73e9, Ula(64)), cb_t, cb_r, budget)
    k = min(budget // 16, 64)
    assert len(cs.tx_beams()) == k and len(cs) == 16 * k
    assert cs.symbol_count <= budget


# --- training ------------------------------------------------------------------------

def single_path_channel(kt, kr, n_tx=64, n_rx=16, heading=math.pi):
    p = Path(PathKind.LOS, on_grid_angle(kt, n_tx), on_grid_angle(kr, n_rx), 30.0, 1e-5)
    return assemble_channel([p], Ula(n_tx), Ula(n_rx, boresight=heading), 73e9)


def test_training_finds_matched_pair():
    cb_t, cb_r = codebooks()
    ch = single_path_channel(10, 3)
    res = run_training(ch, exhaustive_candidates(cb_t, cb_r), cb_t, cb_r)
    assert res.best_pair == (10, 3)
    expected = 30 + 84 + 20 * math.log10(1e-5 * math.sqrt(64 * 16))
    assert res.measured_snr_db == pytest.approx(expected)


def test_training_ties_go_to_first_candidate():
    cb_t, cb_r = codebooks(8, 4)
    ch = assemble_channel([], Ula(8), Ula(4, boresight=math.pi), 73e9)
    cs = CandidateSet(((5, 1), (2, 2), (0, 0)), Strategy.APS_ASSISTED)
    res = run_training(ch, cs, cb_t, cb_r)
    assert res.best_pair == (5, 1) and res.measured_snr_db == -math.inf


def test_training_rejects_empty_set():
    cb_t, cb_r = codebooks(8, 4)
    ch = single_path_channel(1, 1, 8, 4)
    with pytest.raises(ValueError):
        run_training(ch, CandidateSet((), Strategy.EXHAUSTIVE), cb_t, cb_r)


def test_noisy_training_is_seeded():
    cb_t, cb_r = codebooks(16, 4)
    ch = single_path_channel(4, 1, 16, 4)
    cs = exhaustive_candidates(cb_t, cb_r)
    a = run_training(ch, cs, cb_t, cb_r, rng=np.random.default_rng(1), noisy=True)
    b = run_training(ch, cs, cb_t, cb_r, rng=np.random.default_rng(1), noisy=True)
    assert a == b


@given(st.integers(0, 2 ** 32), st.integers(1, 30))
def test_subset_containing_optimum_gives_same_result(seed, extra):
    rng = np.random.default_rng(seed)
    n_tx, n_rx = 16, 8
    paths = [Path(PathKind.LOS, rng.uniform(-1.4, 1.4), rng.uniform(-1.4, 1.4), 20.0,
                  complex(*rng.standard_normal(2)) * 1e-5) for _ in range(3)]
    ch = assemble_channel(paths, Ula(n_tx), Ula(n_rx, boresight=math.pi), 73e9)
    cb_t, cb_r = dft_codebook(Ula(n_tx)), dft_codebook(Ula(n_rx, boresight=math.pi))
    full = run_training(ch, exhaustive_candidates(cb_t, cb_r), cb_t, cb_r)
    others = [tuple(map(int, p)) for p in rng.integers(0, (n_tx, n_rx), size=(extra, 2))]
    subset = tuple(dict.fromkeys(others + [full.best_pair]))
    sub = run_training(ch, CandidateSet(subset, Strategy.APS_ASSISTED), cb_t, cb_r)
    gains = beam_pair_gains(ch, cb_t, cb_r)
    assert gains[sub.best_pair] == pytest.approx(gains[full.best_pair], rel=1e-12)


# --- overhead ---------------------------------------------------------------------------

@pytest.mark.parametrize("pairs,time_s", [(0, 0.0), (1, 4.75e-6), (1024, 4.864e-3), (475, 2.25625e-3)])
def test_overhead_arithmetic(pairs, time_s):
    rep = overhead(pairs)
    assert rep.pair_count == pairs and rep.symbol_duration_s == SYMBOL_DURATION_S
    assert rep.training_time_s == pytest.approx(time_s, rel=1e-12, abs=0)


def test_overhead_rejects_negative():
    with pytest.raises(ValueError):
        overhead(-1)


# --- helpers ------------------------------------------------------------------------------

@given(st.floats(-4.0, 4.0), st.floats(0.0, 3.0), st.floats(-3.2, 3.2))
def test_sine_interval_matches_sampling(lo, width, bore):
    s_lo, s_hi = sine_interval(lo, lo + width, bore)
    sampled = np.sin(np.linspace(lo, lo + width, 20001) - bore)
    assert s_lo == pytest.approx(sampled.min(), abs=1e-6)
    assert s_hi == pytest.approx(sampled.max(), abs=1e-6)


@given(st.floats(-5.0, 5.0), st.floats(-1.0, 1.0), st.floats(0.0, 1.9))
def test_circular_distance_matches_sampling(u, lo, width):
    period = 2.0
    hi = lo + width
    grid = np.linspace(lo, hi, 4001)
    diff = np.abs(np.remainder(u - grid + period / 2, period) - period / 2)
    assert float(circular_distance_to_interval(u, lo, hi, period)) == pytest.approx(diff.min(), abs=1e-3)
