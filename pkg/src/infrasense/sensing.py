"""Infrastructure-side side information: GNSS and radar positions, passive-radar APS."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path as FilePath
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .phyarray import (SPEED_OF_LIGHT, AnyArray, Ula, dbm_to_mw, steering_matrix,
                       steering_vector, wavelength, wrap_angle)
from .raytrace import Path, trace_paths
from .scene import Pose, Scene

BOLTZMANN = 1.380649e-23
REFERENCE_TEMPERATURE_K = 290.0
WEAK_TARGET_SNR_DB = -10.0


class PositionSource(Enum):
    GNSS = "gnss"
    RSU_RADAR = "rsu_radar"


class TargetTooWeakError(RuntimeError):
    """Radar SNR too low for a meaningful position bound."""


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class PositionEstimate:
    reported: tuple[float, float]
    uncertainty_radius: float
    source: PositionSource


@dataclass(frozen=True)
class RadarSpec:
    """Monostatic RSU radar. Defaults follow the INRAS Radarbook front end.

    ``antenna_gain_dbi`` and ``integration_gain_db`` (coherent gain over the
    fast-time samples of one chirp) are not part of the Radarbook sheet values
    and are modelling assumptions needed to close the link budget.
    """

    virtual_antennas: int = 29
    carrier_hz: float = 24e9
    tx_power_dbm: float = 10.0
    bandwidth_hz: float = 250e6
    noise_figure_db: float = 12.0
    target_rcs_dbsm: float = 10.0
    antenna_gain_dbi: float = 13.0
    integration_gain_db: float = 24.0
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if self.virtual_antennas < 2:
            raise ValueError("radar needs at least two virtual antennas")
        if self.carrier_hz <= 0 or self.bandwidth_hz <= 0:
            raise ValueError("carrier and bandwidth must be positive")
        if self.spacing_wavelengths <= 0:
            raise ValueError("antenna spacing must be positive")


class RadarAccuracy(NamedTuple):
    sigma_range_m: float
    sigma_azimuth_rad: float
    snr_db: float
    too_weak: bool


def gnss_estimate(true_pos, radius_m: float = 5.0,
                  rng: Optional[np.random.Generator] = None) -> PositionEstimate:
    """Report ``true_pos`` displaced uniformly inside a disk of ``radius_m``."""
    if radius_m < 0:
        raise ValueError("radius must be non-negative")
    x, y = float(true_pos[0]), float(true_pos[1])
    if radius_m > 0:
        rng = np.random.default_rng() if rng is None else rng
        rho = radius_m * math.sqrt(rng.uniform())
        phi = rng.uniform(0.0, 2 * math.pi)
        # the sqrt draw can land a hair outside after rounding; clamp
        rho = min(rho, radius_m)
        x, y = x + rho * math.cos(phi), y + rho * math.sin(phi)
    return PositionEstimate((x, y), float(radius_m), PositionSource.GNSS)


def radar_snr_db(spec: RadarSpec, range_m: float) -> float:
    lam = wavelength(spec.carrier_hz)
    gain = 10 ** (spec.antenna_gain_dbi / 10)
    rcs = 10 ** (spec.target_rcs_dbsm / 10)
    received_w = (dbm_to_mw(spec.tx_power_dbm) * 1e-3 * gain ** 2 * lam ** 2 * rcs
                  / ((4 * math.pi) ** 3 * range_m ** 4))
    noise_w = BOLTZMANN * REFERENCE_TEMPERATURE_K * spec.bandwidth_hz * 10 ** (spec.noise_figure_db / 10)
    return 10 * math.log10(received_w / noise_w) + spec.integration_gain_db


def range_crb(bandwidth_hz: float, snr_lin: float) -> float:
    return SPEED_OF_LIGHT / (2 * bandwidth_hz * math.sqrt(2 * snr_lin))


def azimuth_crb(n: int, snr_lin: float, azimuth: float, spacing_wavelengths: float = 0.5) -> float:
    """Single-source angle bound for an n-element ULA, per-element SNR."""
    kd = 2 * math.pi * spacing_wavelengths * math.cos(azimuth)
    return math.sqrt(6.0 / (snr_lin * kd ** 2 * n * (n ** 2 - 1)))


def radar_position_error(spec: RadarSpec, range_m: float, azimuth: float) -> RadarAccuracy:
    """Range and azimuth standard deviations at the Cramér-Rao bound.

    ``azimuth`` is measured from the radar boresight. Below -10 dB SNR the
    sigmas saturate at (range, pi/2) and ``too_weak`` is set.
    """
    if range_m <= 0:
        raise ValueError("range must be positive")
    snr_db = radar_snr_db(spec, range_m)
    if snr_db < WEAK_TARGET_SNR_DB:
        return RadarAccuracy(float(range_m), math.pi / 2, snr_db, True)
    snr = 10 ** (snr_db / 10)
    return RadarAccuracy(range_crb(spec.bandwidth_hz, snr),
                         azimuth_crb(spec.virtual_antennas, snr, azimuth, spec.spacing_wavelengths),
                         snr_db, False)


def polar_estimate(true_pos, origin, boresight: float, sigma_range: float, sigma_azimuth: float,
                   rng: Optional[np.random.Generator] = None) -> PositionEstimate:
    """Perturb range and bearing about ``origin``; 3-sigma containment radius."""
    d = np.asarray(true_pos[:2], dtype=float) - np.asarray(origin[:2], dtype=float)
    rng_m = float(np.hypot(*d))
    bearing = math.atan2(d[1], d[0])
    if sigma_range > 0 or sigma_azimuth > 0:
        rng = np.random.default_rng() if rng is None else rng
        rng_m = rng_m + sigma_range * rng.standard_normal()
        bearing = bearing + sigma_azimuth * rng.standard_normal()
    reported = (float(origin[0] + rng_m * math.cos(bearing)),
                float(origin[1] + rng_m * math.sin(bearing)))
    radius = 3 * math.hypot(sigma_range, float(np.hypot(*d)) * sigma_azimuth)
    return PositionEstimate(reported, radius, PositionSource.RSU_RADAR)


def rsu_radar_estimate(spec: RadarSpec, true_pos, rsu_pose: Pose,
                       rng: Optional[np.random.Generator] = None) -> PositionEstimate:
    d = np.asarray(true_pos[:2], dtype=float) - rsu_pose.xy
    range_m = float(np.hypot(*d))
    azimuth = wrap_angle(math.atan2(d[1], d[0]) - rsu_pose.boresight)
    if abs(azimuth) >= math.pi / 2:
        raise ValueError(f"target at {math.degrees(azimuth):.1f} deg is outside the radar field of view")
    acc = radar_position_error(spec, range_m, azimuth)
    if acc.too_weak:
        raise TargetTooWeakError(f"radar SNR {acc.snr_db:.1f} dB at {range_m:.1f} m")
    return polar_estimate(true_pos, rsu_pose.position, rsu_pose.boresight,
                          acc.sigma_range_m, acc.sigma_azimuth_rad, rng)


@dataclass(frozen=True, eq=False)
class SpatialCovariance:
    r: np.ndarray
    carrier_hz: float
    array: Ula

    def min_eigenvalue_ratio(self) -> float:
        """Smallest eigenvalue over trace; >= -1e-9 counts as PSD."""
        trace = float(np.real(np.trace(self.r)))
        lam = float(np.linalg.eigvalsh(self.r).min())
        return lam / trace if trace > 0 else lam

    def is_psd(self, tol: float = 1e-9) -> bool:
        return bool(np.allclose(self.r, self.r.conj().T, atol=1e-12 * max(1.0, np.abs(self.r).max()))
                    and self.min_eigenvalue_ratio() >= -tol)


def snapshot_covariance(array: Ula, azimuths: Sequence[float], amplitudes: Sequence[complex],
                        noise_power: float, snapshots: int,
                        rng: np.random.Generator) -> np.ndarray:
    """Sample covariance of snapshots with i.i.d. per-snapshot path phases.

    ``azimuths`` are in the scene frame; ``noise_power`` is per element.
    """
    if snapshots < 1:
        raise ValueError("need at least one snapshot")
    n = array.n
    amps = np.asarray(amplitudes, dtype=complex)
    x = np.zeros((n, snapshots), dtype=complex)
    if amps.size:
        a = steering_matrix(array, azimuths)
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(amps.size, snapshots)))
        x += a @ (amps[:, None] * phases)
    if noise_power > 0:
        x += math.sqrt(noise_power / 2) * (rng.standard_normal((n, snapshots))
                                            + 1j * rng.standard_normal((n, snapshots)))
    r = x @ x.conj().T / snapshots
    return (r + r.conj().T) / 2


def passive_radar_covariance(scene: Scene, radar_pose: Pose, rsu_array: Ula, radar_carrier_hz: float,
                             rng: np.random.Generator, snapshots: int = 64,
                             tx_power_dbm: float = 10.0,
                             noise_power_dbm: float = -78.0) -> SpatialCovariance:
    """Covariance at the RSU receive array of the ego's automotive radar signal."""
    paths = trace_paths(scene, radar_pose, scene.rsu_pose, radar_carrier_hz, rng)
    scale = math.sqrt(dbm_to_mw(tx_power_dbm))
    azimuths = [p.aoa_azimuth + rsu_array.boresight for p in paths]
    amplitudes = [p.gain * scale for p in paths]
    r = snapshot_covariance(rsu_array, azimuths, amplitudes, dbm_to_mw(noise_power_dbm),
                            snapshots, rng)
    return SpatialCovariance(r, radar_carrier_hz, rsu_array)


def path_covariance(paths: Sequence[Path], array: Ula, carrier_hz: float,
                    side: str = "tx", power_scale: float = 1.0) -> SpatialCovariance:
    """Phase-averaged covariance sum |g|^2 a a^H seen from one end of the paths."""
    r = np.zeros((array.n, array.n), dtype=complex)
    for p in paths:
        az = (p.aod_azimuth if side == "tx" else p.aoa_azimuth) + array.boresight
        a = steering_vector(array, az)
        r += power_scale * abs(p.gain) ** 2 * np.outer(a, a.conj())
    return SpatialCovariance(r, carrier_hz, array)


@dataclass(frozen=True, eq=False)
class Aps:
    grid: np.ndarray   # radians from array boresight
    power: np.ndarray

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0]) if self.grid.size > 1 else math.pi

    def peak_angle(self) -> float:
        return float(self.grid[int(np.argmax(self.power))])


def aps_grid(grid_size: int = 512) -> np.ndarray:
    """Uniform grid from -pi/2 (inclusive) to pi/2 (exclusive).

    The +pi/2 endpoint is dropped: for half-wavelength spacing it aliases
    onto -pi/2 and would tie with it in every spectrum.
    """
    if grid_size < 2:
        raise ValueError("APS grid needs at least two points")
    return -np.pi / 2 + np.pi * np.arange(grid_size) / grid_size


def estimate_aps(cov: SpatialCovariance, grid_size: int = 512) -> Aps:
    """Bartlett spectrum a^H R a / n^2 over the boresight-relative grid."""
    grid = aps_grid(grid_size)
    a = steering_matrix(cov.array, grid + cov.array.boresight)
    power = np.real(np.sum(a.conj() * (cov.r @ a), axis=0)) / cov.array.n ** 2
    return Aps(grid, np.maximum(power, 0.0))


def translate_aps(radar_aps: Aps, comm_array: Ula, comm_carrier_hz: float = 73e9) -> SpatialCovariance:
    """Synthesise a comm-band covariance sum_g P_g a_c(theta_g) a_c(theta_g)^H.

    Both arrays use half-wavelength spacing at their own carrier, so an
    azimuth bin transfers unchanged and only the array size changes.
    """
    a = steering_matrix(comm_array, radar_aps.grid + comm_array.boresight)
    r = (a * radar_aps.power[None, :]) @ a.conj().T
    r = (r + r.conj().T) / 2
    return SpatialCovariance(r, comm_carrier_hz, comm_array)


def aps_similarity(a: Aps, b: Aps) -> tuple[float, float]:
    """(peak angle of ``a`` minus peak angle of ``b``, Pearson correlation)."""
    if a.grid.shape != b.grid.shape or not np.allclose(a.grid, b.grid, rtol=0, atol=1e-12):
        raise GridMismatchError("APS grids differ")
    offset = a.peak_angle() - b.peak_angle()
    pa = a.power / a.power.max() if a.power.max() > 0 else a.power
    pb = b.power / b.power.max() if b.power.max() > 0 else b.power
    if np.ptp(pa) == 0 or np.ptp(pb) == 0:
        corr = 1.0 if np.array_equal(pa, pb) else 0.0
    else:
        corr = float(np.corrcoef(pa, pb)[0, 1])
    return float(offset), float(np.clip(corr, -1.0, 1.0))


def write_aps_csv(aps: Aps, path, normalize: bool = False) -> None:
    power = aps.power / aps.power.max() if normalize and aps.power.max() > 0 else aps.power
    path = FilePath(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["angle_deg", "power"])
        for angle, p in zip(np.degrees(aps.grid), power):
            writer.writerow([f"{angle:.6g}", f"{p:.6g}"])
