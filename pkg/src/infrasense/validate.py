"""Fast self-checks of the simulator's invariants, run by ``infrasense validate``."""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, NamedTuple

import numpy as np

from .beamselect import aps_candidates, overhead
from .campaign import run_campaign
from .config import ExperimentConfig, StrategyConfig
from .phyarray import Ula, dft_codebook, steering_vector
from .raytrace import trace_paths
from .scene import boxes_overlap, build_scene
from .sensing import Aps, SpatialCovariance, estimate_aps, translate_aps


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str


def _dft_unitary(cfg, rng) -> str:
    cb = dft_codebook(Ula(cfg.comm.n_tx))
    err = float(np.abs(cb.gram() - np.eye(len(cb))).max())
    assert err < 1e-9, f"max |F^H F - I| = {err:.3g}"
    return f"max |F^H F - I| = {err:.1e}"


def _matched_bin(cfg, rng) -> str:
    n = 8
    a = steering_vector(Ula(n), math.asin(0.25))
    beam = dft_codebook(Ula(n)).beams[1] * math.sqrt(n)
    mag = abs(beam.conj() @ a)
    assert abs(mag - n) < 1e-9, f"|<beam, a>| = {mag}"
    return f"|<beam 1, a>| = {mag:.6g}"


def _aps_nonnegative_psd(cfg, rng) -> str:
    n = 32
    worst = 0.0
    for _ in range(20):
        x = rng.standard_normal((n, 4)) + 1j * rng.standard_normal((n, 4))
        aps = estimate_aps(SpatialCovariance(x @ x.conj().T, 76e9, Ula(n)), 128)
        assert (aps.power >= 0).all(), "negative APS value"
        rc = translate_aps(Aps(aps.grid, rng.random(128)), Ula(cfg.comm.n_tx), cfg.comm.carrier_hz)
        worst = min(worst, rc.min_eigenvalue_ratio())
        assert rc.is_psd(), f"lambda_min/trace = {rc.min_eigenvalue_ratio():.3g}"
    return f"worst lambda_min/trace = {worst:.2e}"


def _budget_law(cfg, rng) -> str:
    cb_tx, cb_rx = dft_codebook(Ula(cfg.comm.n_tx)), dft_codebook(Ula(cfg.comm.n_rx))
    r = SpatialCovariance(np.eye(cfg.comm.n_tx, dtype=complex), cfg.comm.carrier_hz, Ula(cfg.comm.n_tx))
    for budget in (cfg.comm.n_rx, 100, 560, 1000):
        got = len(aps_candidates(r, cb_tx, cb_rx, budget))
        want = min(budget // cfg.comm.n_rx, cfg.comm.n_tx) * cfg.comm.n_rx
        assert got == want, f"budget {budget}: {got} pairs, expected {want}"
    return "pair count = floor(budget / n_rx) * n_rx"


def _overhead_exact(cfg, rng) -> str:
    for count, ms in ((1024, 4.864), (475, 2.25625), (32, 0.152)):
        got = overhead(count).training_time_s * 1e3
        assert math.isclose(got, ms, rel_tol=1e-12), f"{count} pairs -> {got} ms"
    return "1024 / 475 / 32 pairs -> 4.864 / 2.25625 / 0.152 ms"


def _scene_and_reciprocity(cfg, rng) -> str:
    worst = 0.0
    for k in range(5):
        scene = build_scene(dataclasses.replace(cfg.scene, seed=int(rng.integers(2 ** 32))))
        boxes = scene.vehicle_boxes
        assert not any(boxes_overlap(a, b) for i, a in enumerate(boxes) for b in boxes[i + 1:])
        fwd = sorted(p.length for p in trace_paths(scene, scene.rsu_pose, scene.ego_array_pose, 73e9))
        rev = sorted(p.length for p in trace_paths(scene, scene.ego_array_pose, scene.rsu_pose, 73e9))
        assert len(fwd) == len(rev), "path sets differ under tx/rx swap"
        if fwd:
            worst = max(worst, float(np.abs(np.subtract(fwd, rev)).max()))
    return f"no overlaps; max reciprocity length error {worst:.1e} m"


def _campaign_invariants(cfg, rng) -> str:
    small = cfg.replace(trials=4, strategies=(StrategyConfig("exhaustive"),) + tuple(
        s for s in cfg.strategies if s.name != "exhaustive"))
    serial = run_campaign(small, threads=1)
    threaded = run_campaign(small, threads=3)
    assert serial == threaded, "records depend on the thread count"
    assert serial.summary("exhaustive").success_pct == 100.0, "exhaustive missed its own argmax"
    for r in serial.records:
        for o in r.outcomes:
            assert (o.snr_gap_db == 0.0) == o.success, f"trial {r.trial}: gap/success mismatch"
    return "exhaustive 100%, thread-invariant, zero gap iff success"


CHECKS: tuple[tuple[str, Callable], ...] = (
    ("dft codebook is unitary", _dft_unitary),
    ("on-bin steering vector matches its DFT beam", _matched_bin),
    ("APS nonnegative and translated covariance PSD", _aps_nonnegative_psd),
    ("APS budget law", _budget_law),
    ("overhead arithmetic", _overhead_exact),
    ("scene packing and path reciprocity", _scene_and_reciprocity),
    ("campaign determinism and self-consistency", _campaign_invariants),
)


def run_checks(cfg: ExperimentConfig) -> list[Check]:
    rng = np.random.default_rng(cfg.seed)
    out = []
    for name, fn in CHECKS:
        try:
            out.append(Check(name, True, fn(cfg, rng)))
        except AssertionError as exc:
            out.append(Check(name, False, str(exc)))
    return out
