"""Direct and single-bounce specular paths through a scene.

Obstruction is decided in plan view: a vehicle footprint or building face
crossed by the plan projection of a ray segment blocks it. Path lengths are
three-dimensional. Reflections come from the image method on vertical faces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .phyarray import wavelength, wrap_angle
from .scene import Box, Face, Pose, Scene

EPS = 1e-9


class PathKind(Enum):
    LOS = "los"
    WALL_BOUNCE = "wall"
    VEHICLE_BOUNCE = "vehicle"


class ChannelState(Enum):
    LOS = "LOS"
    NLOS = "NLOS"


@dataclass(frozen=True)
class Path:
    """One ray. Angles are relative to the tx / rx pose boresights."""

    kind: PathKind
    aod_azimuth: float
    aoa_azimuth: float
    length: float
    gain: complex
    bounce_point: Optional[tuple[float, float, float]] = None
    # which face reflected it: index into building faces, or (box, side)
    reflector: Optional[tuple[int, ...]] = None


def free_space_amplitude(length: float, carrier_hz: float) -> float:
    return wavelength(carrier_hz) / (4 * math.pi * length)


def _rects(boxes: Sequence[Box]) -> np.ndarray:
    if not boxes:
        return np.zeros((0, 4))
    return np.array([b.bounds for b in boxes], dtype=float)


def segment_hits_rects(p: np.ndarray, q: np.ndarray, rects: np.ndarray) -> np.ndarray:
    """Per-rectangle flag: does segment p->q pass through the open interior?"""
    if rects.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    lo = rects[:, [0, 2]] + EPS
    hi = rects[:, [1, 3]] - EPS
    d = q - p
    t_enter = np.zeros(rects.shape[0])
    t_exit = np.ones(rects.shape[0])
    for axis in range(2):
        if abs(d[axis]) < 1e-15:
            inside = (lo[:, axis] < p[axis]) & (p[axis] < hi[:, axis])
            t_exit = np.where(inside, t_exit, -1.0)
            continue
        t1 = (lo[:, axis] - p[axis]) / d[axis]
        t2 = (hi[:, axis] - p[axis]) / d[axis]
        t_enter = np.maximum(t_enter, np.minimum(t1, t2))
        t_exit = np.minimum(t_exit, np.maximum(t1, t2))
    return t_enter < t_exit - EPS


def _cross(a, b) -> float:
    return a[0] * b[1] - a[1] * b[0]


def segment_crosses_face(p: np.ndarray, q: np.ndarray, face: Face) -> bool:
    """Proper plan-view crossing of two segments (touching does not count)."""
    a = np.asarray(face.start)
    b = np.asarray(face.end)
    d1 = _cross(b - a, p - a)
    d2 = _cross(b - a, q - a)
    d3 = _cross(q - p, a - p)
    d4 = _cross(q - p, b - p)
    scale = max(np.linalg.norm(b - a) * np.linalg.norm(q - p), 1e-30)
    tol = EPS * scale

    def opposite(u, v):
        return (u > tol and v < -tol) or (u < -tol and v > tol)

    return opposite(d1, d2) and opposite(d3, d4)


def _endpoint_boxes(boxes: Sequence[Box], points: Iterable[np.ndarray]) -> set[int]:
    hosts = set()
    for i, box in enumerate(boxes):
        x0, x1, y0, y1 = box.bounds
        for pt in points:
            if x0 - 1e-6 <= pt[0] <= x1 + 1e-6 and y0 - 1e-6 <= pt[1] <= y1 + 1e-6:
                hosts.add(i)
    return hosts


class _Blockage:
    def __init__(self, scene: Scene, excluded: set[int]):
        keep = [i for i in range(len(scene.vehicle_boxes)) if i not in excluded]
        self.index = np.array(keep, dtype=int)
        self.rects = _rects([scene.vehicle_boxes[i] for i in keep])
        self.faces = scene.building_faces

    def blocked(self, p, q, skip_box: Optional[int] = None, skip_face: Optional[int] = None) -> bool:
        hits = segment_hits_rects(p, q, self.rects)
        if skip_box is not None:
            hits &= self.index != skip_box
        if hits.any():
            return True
        return any(segment_crosses_face(p, q, f)
                   for j, f in enumerate(self.faces) if j != skip_face)


def _reflect(t3: np.ndarray, r3: np.ndarray, face: Face):
    """Image-method bounce point on ``face`` or None when it misses."""
    a = np.asarray(face.start)
    b = np.asarray(face.end)
    n = np.asarray(face.normal)
    t, r = t3[:2], r3[:2]
    dt = float((t - a) @ n)
    dr = float((r - a) @ n)
    if dt <= EPS or dr <= EPS:
        return None
    image = t - 2 * dt * n
    s = dt / (dt + dr)
    x = image + s * (r - image)
    ab = b - a
    u = float((x - a) @ ab) / float(ab @ ab)
    if not EPS < u < 1 - EPS:
        return None
    z = t3[2] + s * (r3[2] - t3[2])
    plan = float(np.linalg.norm(r - image))
    length = math.hypot(plan, r3[2] - t3[2])
    return np.array([x[0], x[1], z]), length


def trace_paths(scene: Scene, tx_pose: Pose, rx_pose: Pose, carrier_hz: float,
                rng: Optional[np.random.Generator] = None) -> list[Path]:
    """LOS plus one specular path per admissible reflecting face.

    Boxes containing either endpoint (the vehicle an array is mounted on) are
    neither obstacles nor reflectors. Each path gets a uniform random phase
    from ``rng`` in output order; with ``rng=None`` all phases are zero.
    """
    if carrier_hz <= 0:
        raise ValueError("carrier frequency must be positive")
    t3 = np.asarray(tx_pose.position, dtype=float)
    r3 = np.asarray(rx_pose.position, dtype=float)
    t, r = t3[:2], r3[:2]
    excluded = _endpoint_boxes(scene.vehicle_boxes, (t, r))
    blockage = _Blockage(scene, excluded)

    found: list[tuple] = []
    if not blockage.blocked(t, r):
        length = float(np.linalg.norm(r3 - t3))
        d = r - t
        found.append((PathKind.LOS, math.atan2(d[1], d[0]), math.atan2(-d[1], -d[0]),
                      length, 0.0, None, None))

    for j, face in enumerate(scene.building_faces):
        hit = _reflect(t3, r3, face)
        if hit is None:
            continue
        point, length = hit
        if not 0 <= point[2] <= face.height:
            continue
        x = point[:2]
        if blockage.blocked(t, x, skip_face=j) or blockage.blocked(x, r, skip_face=j):
            continue
        found.append((PathKind.WALL_BOUNCE, *_angles(t, r, x), length, face.loss_db,
                      tuple(float(v) for v in point), (j,)))

    for i, box in enumerate(scene.vehicle_boxes):
        if i in excluded:
            continue
        for side, face in enumerate(box.faces(scene.vehicle_loss_db)):
            hit = _reflect(t3, r3, face)
            if hit is None:
                continue
            point, length = hit
            x = point[:2]
            if blockage.blocked(t, x, skip_box=i) or blockage.blocked(x, r, skip_box=i):
                continue
            found.append((PathKind.VEHICLE_BOUNCE, *_angles(t, r, x), length, face.loss_db,
                          tuple(float(v) for v in point), (i, side)))

    paths = []
    for kind, aod, aoa, length, loss_db, point, reflector in found:
        phase = 0.0 if rng is None else rng.uniform(0.0, 2 * math.pi)
        amplitude = free_space_amplitude(length, carrier_hz) * 10 ** (-loss_db / 20)
        paths.append(Path(kind, wrap_angle(aod - tx_pose.boresight),
                          wrap_angle(aoa - rx_pose.boresight), length,
                          complex(amplitude * np.exp(1j * phase)), point, reflector))
    return paths


def _angles(t: np.ndarray, r: np.ndarray, x: np.ndarray) -> tuple[float, float]:
    out = x - t
    back = x - r
    return math.atan2(out[1], out[0]), math.atan2(back[1], back[0])


def classify_state(paths: Sequence[Path]) -> ChannelState:
    """LOS when a direct path survives; an empty path list counts as NLOS."""
    if any(p.kind is PathKind.LOS for p in paths):
        return ChannelState.LOS
    return ChannelState.NLOS
