"""Uniform linear arrays, DFT codebooks and the narrowband geometric channel."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


def wavelength(carrier_hz: float) -> float:
    return SPEED_OF_LIGHT / carrier_hz


def wrap_angle(angle):
    """Wrap an angle (or array of angles) to (-pi, pi]."""
    wrapped = np.mod(np.asarray(angle, dtype=float) + np.pi, 2 * np.pi) - np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    return float(wrapped) if np.ndim(wrapped) == 0 else wrapped


@dataclass(frozen=True)
class Ula:
    """Uniform linear array.

    ``boresight`` is the broadside azimuth of the array in the scene frame.
    Elements are isotropic unless ``element_pattern`` is ``"half_space"``,
    an amplitude pattern sqrt(max(cos(theta), 0)) for panels backed by a
    ground plane.
    """

    n: int
    spacing_wavelengths: float = 0.5
    boresight: float = 0.0
    element_pattern: str = "isotropic"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"array needs at least one element, got n={self.n}")
        if not self.spacing_wavelengths > 0:
            raise ValueError("element spacing must be positive")
        if self.element_pattern not in ("isotropic", "half_space"):
            raise ValueError(f"unknown element pattern {self.element_pattern!r}")

    def element_gain(self, azimuth):
        if self.element_pattern == "isotropic":
            return np.ones_like(np.asarray(azimuth, dtype=float))
        return np.sqrt(np.maximum(np.cos(np.asarray(azimuth, dtype=float) - self.boresight), 0.0))


@dataclass(frozen=True)
class ArrayGroup:
    """Several ULAs sharing one phase centre, e.g. the four roof panels.

    The group's stacked response is the concatenation of each member's
    steering vector. ``boresight`` is the reference heading that path angles
    are measured against; member boresights are absolute.
    """

    arrays: tuple[Ula, ...]
    boresight: float = 0.0

    @property
    def n(self) -> int:
        return sum(a.n for a in self.arrays)

    @classmethod
    def panels(cls, n_per_panel: int, heading: float, count: int = 4,
               spacing_wavelengths: float = 0.5) -> "ArrayGroup":
        step = 2 * np.pi / count
        arrays = tuple(Ula(n_per_panel, spacing_wavelengths, wrap_angle(heading + k * step),
                           "half_space") for k in range(count))
        return cls(arrays, heading)


AnyArray = Union[Ula, ArrayGroup]


def steering_vector(array: Ula, azimuth: float) -> np.ndarray:
    """Unnormalised ULA response toward a scene-frame azimuth.

    Isotropic arrays have 2-norm sqrt(n).
    """
    k = np.arange(array.n)
    phase = 2 * np.pi * array.spacing_wavelengths * k * np.sin(azimuth - array.boresight)
    return array.element_gain(azimuth) * np.exp(1j * phase)


def steering_matrix(array: Ula, azimuths) -> np.ndarray:
    """Columns are steering vectors, shape (n, len(azimuths))."""
    az = np.atleast_1d(np.asarray(azimuths, dtype=float))
    k = np.arange(array.n)[:, None]
    return array.element_gain(az)[None, :] * np.exp(
        1j * 2 * np.pi * array.spacing_wavelengths * k * np.sin(az[None, :] - array.boresight))


def array_response(array: AnyArray, azimuth: float) -> np.ndarray:
    if isinstance(array, ArrayGroup):
        return np.concatenate([steering_vector(a, azimuth) for a in array.arrays])
    return steering_vector(array, azimuth)


@dataclass(frozen=True, eq=False)
class Codebook:
    """Ordered unit-norm beams, one per row of ``beams``.

    Alongside the vectors each beam carries the sin-domain centre of its
    mainlobe (in its own array's frame), the null-to-null half-width, the
    boresight of the array it belongs to and that array's index in a group.
    """

    beams: np.ndarray
    centers: np.ndarray
    halfwidths: np.ndarray
    boresights: np.ndarray
    periods: np.ndarray
    array_index: np.ndarray

    def __len__(self) -> int:
        return self.beams.shape[0]

    @property
    def n(self) -> int:
        return self.beams.shape[1]

    @property
    def num_arrays(self) -> int:
        return int(self.array_index.max()) + 1

    @property
    def beams_per_array(self) -> int:
        return len(self) // self.num_arrays

    def gram(self) -> np.ndarray:
        return self.beams.conj() @ self.beams.T


def _dft_single(array: Ula):
    n = array.n
    k = np.arange(n)
    beams = np.exp(1j * 2 * np.pi * np.outer(k, k) / n) / math.sqrt(n)
    # spatial frequency 2*pi*k/n folded into [-pi, pi)
    psi = np.mod(2 * np.pi * k / n + np.pi, 2 * np.pi) - np.pi
    centers = psi / (2 * np.pi * array.spacing_wavelengths)
    halfwidth = 1.0 / (n * array.spacing_wavelengths)
    period = 1.0 / array.spacing_wavelengths
    return beams, centers, halfwidth, period


def dft_codebook(array: AnyArray) -> Codebook:
    """DFT codebook; for a group, the block-diagonal union over members."""
    members = array.arrays if isinstance(array, ArrayGroup) else (array,)
    total = sum(a.n for a in members)
    rows, centers, halfwidths, boresights, periods, index = [], [], [], [], [], []
    offset = 0
    for i, member in enumerate(members):
        beams, c, hw, period = _dft_single(member)
        block = np.zeros((member.n, total), dtype=complex)
        block[:, offset:offset + member.n] = beams
        rows.append(block)
        centers.append(c)
        halfwidths.append(np.full(member.n, hw))
        boresights.append(np.full(member.n, member.boresight))
        periods.append(np.full(member.n, period))
        index.append(np.full(member.n, i))
        offset += member.n
    return Codebook(np.vstack(rows), np.concatenate(centers), np.concatenate(halfwidths),
                    np.concatenate(boresights), np.concatenate(periods),
                    np.concatenate(index))


@dataclass(frozen=True, eq=False)
class Channel:
    h: np.ndarray  # (n_rx, n_tx)
    carrier_hz: float


def assemble_channel(paths: Sequence, tx: AnyArray, rx: AnyArray, carrier_hz: float) -> Channel:
    """Sum of per-path rank-one terms gain * a_rx(aoa) a_tx(aod)^H.

    Path angles are relative to the poses they were traced between, whose
    boresights are taken to equal ``tx.boresight`` and ``rx.boresight``.
    """
    h = np.zeros((rx.n, tx.n), dtype=complex)
    for p in paths:
        a_tx = array_response(tx, p.aod_azimuth + tx.boresight)
        a_rx = array_response(rx, p.aoa_azimuth + rx.boresight)
        h += p.gain * np.outer(a_rx, a_tx.conj())
    return Channel(h, carrier_hz)


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def _to_db(power):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(power)


def pair_snr(channel: Channel, f: np.ndarray, w: np.ndarray,
             tx_power_dbm: float = 30.0, noise_power_dbm: float = -84.0) -> float:
    """SNR in dB of one beam pair; ``-inf`` when the effective gain is zero."""
    if f.shape[0] != channel.h.shape[1] or w.shape[0] != channel.h.shape[0]:
        raise ValueError("beam dimensions do not match the channel")
    gain = np.abs(w.conj() @ channel.h @ f) ** 2
    return float(_to_db(gain)) + tx_power_dbm - noise_power_dbm


def beam_pair_gains(channel: Channel, cb_tx: Codebook, cb_rx: Codebook) -> np.ndarray:
    """|w_r^H H f_t|^2 for every pair, indexed [tx, rx]."""
    return np.abs(beam_pair_responses(channel, cb_tx, cb_rx)) ** 2


def beam_pair_responses(channel: Channel, cb_tx: Codebook, cb_rx: Codebook) -> np.ndarray:
    """Complex w_r^H H f_t for every pair, indexed [tx, rx]."""
    return (cb_rx.beams.conj() @ channel.h @ cb_tx.beams.T).T


def pair_snr_matrix(channel: Channel, cb_tx: Codebook, cb_rx: Codebook,
                    tx_power_dbm: float = 30.0, noise_power_dbm: float = -84.0) -> np.ndarray:
    return _to_db(beam_pair_gains(channel, cb_tx, cb_rx)) + tx_power_dbm - noise_power_dbm
