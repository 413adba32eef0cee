"""Urban-canyon drops: buildings, lanes of parked-in-time vehicles, RSU and ego poses.

Scene frame: x runs along the road from 0 to ``canyon_length``, y across it
with the road occupying ``|y| <= road_width / 2``, z is height above the road.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class InfeasibleDropError(ValueError):
    """The requested vehicles cannot be packed into the canyon."""


@dataclass(frozen=True)
class SceneConfig:
    road_width: float = 20.0
    canyon_length: float = 200.0
    building_setback: float = 3.0
    building_height: float = 20.0
    rsu_height: float = 5.0
    rsu_offset_along_road: float = 0.0
    rsu_lateral: float = 5.0  # gantry over the divider between the +y lanes
    rsu_boresight: float = 0.0
    vehicle_dims: tuple[float, float, float] = (5.0, 2.0, 1.6)
    lane_count: int = 4
    inter_vehicle_gap_mean: float = 17.0
    vehicle_count: int = 30
    radar_mount_height: float = 0.5
    reflection_loss_concrete_db: float = 6.0
    reflection_loss_metal_db: float = 3.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "vehicle_dims", tuple(float(v) for v in self.vehicle_dims))
        lengths = dict(road_width=self.road_width, canyon_length=self.canyon_length,
                       building_setback=self.building_setback,
                       building_height=self.building_height, rsu_height=self.rsu_height,
                       inter_vehicle_gap_mean=self.inter_vehicle_gap_mean,
                       radar_mount_height=self.radar_mount_height)
        for name, value in lengths.items():
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if len(self.vehicle_dims) != 3 or min(self.vehicle_dims) <= 0:
            raise ValueError("vehicle_dims must be three positive lengths")
        if self.lane_count < 1:
            raise ValueError("lane_count must be at least 1")
        if self.vehicle_count < 1:
            raise ValueError("vehicle_count must be at least 1")
        if self.rsu_height <= self.vehicle_dims[2]:
            raise ValueError("rsu_height must exceed the vehicle height")
        if self.vehicle_dims[1] > self.lane_width:
            raise ValueError("vehicle is wider than a lane")
        if abs(self.rsu_lateral) > self.road_width / 2 + self.building_setback:
            raise ValueError("RSU must stand between the building faces")
        if not 0 <= self.rsu_offset_along_road <= self.canyon_length:
            raise ValueError("RSU must stand inside the canyon")
        if self.reflection_loss_concrete_db < 0 or self.reflection_loss_metal_db < 0:
            raise ValueError("reflection losses are attenuations and must be >= 0 dB")

    @property
    def lane_width(self) -> float:
        return self.road_width / self.lane_count


@dataclass(frozen=True)
class Pose:
    position: tuple[float, float, float]
    boresight: float = 0.0

    @property
    def xy(self) -> np.ndarray:
        return np.array(self.position[:2])


@dataclass(frozen=True)
class Face:
    """Vertical reflecting plane, a segment in plan view extruded to ``height``.

    ``normal`` is the unit outward normal in plan view; only waves on that
    side reflect.
    """

    start: tuple[float, float]
    end: tuple[float, float]
    height: float
    normal: tuple[float, float]
    loss_db: float
    material: str


@dataclass(frozen=True)
class Box:
    """Axis-aligned vehicle body; ``heading`` is 0 (+x) or pi (-x)."""

    center: tuple[float, float]
    dims: tuple[float, float, float]
    heading: float

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        length, width, _ = self.dims
        along_x = abs(math.cos(self.heading)) > 0.5
        hx, hy = (length / 2, width / 2) if along_x else (width / 2, length / 2)
        cx, cy = self.center
        return cx - hx, cx + hx, cy - hy, cy + hy

    @property
    def height(self) -> float:
        return self.dims[2]

    def faces(self, loss_db: float) -> tuple[Face, ...]:
        x0, x1, y0, y1 = self.bounds
        h = self.height
        return (
            Face((x0, y0), (x1, y0), h, (0.0, -1.0), loss_db, "metal"),
            Face((x1, y0), (x1, y1), h, (1.0, 0.0), loss_db, "metal"),
            Face((x1, y1), (x0, y1), h, (0.0, 1.0), loss_db, "metal"),
            Face((x0, y1), (x0, y0), h, (-1.0, 0.0), loss_db, "metal"),
        )


@dataclass(frozen=True)
class Scene:
    building_faces: tuple[Face, ...]
    vehicle_boxes: tuple[Box, ...]
    rsu_pose: Pose
    ego_vehicle_index: int
    ego_array_pose: Pose
    vehicle_loss_db: float = 3.0
    radar_mount_height: float = 0.5
    bounds: tuple[float, float, float, float] = field(default=(0.0, 0.0, 0.0, 0.0))

    @property
    def ego_box(self) -> Box:
        return self.vehicle_boxes[self.ego_vehicle_index]

    @property
    def ego_heading(self) -> float:
        return self.ego_box.heading

    @property
    def ego_radar_pose(self) -> Pose:
        """Automotive radar on the ego front bumper, facing the heading."""
        box = self.ego_box
        cx, cy = box.center
        half = box.dims[0] / 2
        return Pose((cx + half * math.cos(box.heading), cy + half * math.sin(box.heading),
                     self.radar_mount_height), box.heading)

    def ego_range(self) -> float:
        """Plan-view distance from RSU to the ego communication array."""
        return float(np.hypot(*(self.ego_array_pose.xy - self.rsu_pose.xy)))


def _lane_centres(config: SceneConfig) -> np.ndarray:
    w = config.lane_width
    return -config.road_width / 2 + (np.arange(config.lane_count) + 0.5) * w


def _lane_heading(y: float, lane_count: int) -> float:
    # right-hand traffic: the y < 0 half drives toward +x
    if lane_count == 1 or y < 0:
        return 0.0
    return math.pi


def _place_lane(n: int, config: SceneConfig, rng: np.random.Generator) -> np.ndarray:
    """Centre x-coordinates of ``n`` vehicles in one lane."""
    length = config.vehicle_dims[0]
    span_budget = config.canyon_length
    clearance = np.maximum(1.0, rng.exponential(config.inter_vehicle_gap_mean, size=max(n - 1, 0)))
    span = n * length + clearance.sum()
    if span > span_budget:
        spare = span_budget - n * length - (n - 1) * 1.0
        excess = clearance - 1.0
        clearance = 1.0 + excess * (spare / excess.sum())
        span = n * length + clearance.sum()
    start = rng.uniform(0.0, max(span_budget - span, 0.0))
    rears = start + np.concatenate([[0.0], np.cumsum(length + clearance)])
    return np.minimum(rears + length / 2, span_budget - length / 2)


def build_scene(config: SceneConfig) -> Scene:
    """Draw one drop, deterministic in ``config`` (including its seed)."""
    lanes = config.lane_count
    per_lane = [config.vehicle_count // lanes + (i < config.vehicle_count % lanes)
                for i in range(lanes)]
    length = config.vehicle_dims[0]
    if max(per_lane) * (length + 1.0) > config.canyon_length:
        raise InfeasibleDropError(
            f"{max(per_lane)} vehicles of length {length} m do not fit in a "
            f"{config.canyon_length} m lane")

    rng = np.random.default_rng(config.seed)
    boxes = []
    for y, n in zip(_lane_centres(config), per_lane):
        if n == 0:
            continue
        heading = _lane_heading(float(y), lanes)
        for x in _place_lane(n, config, rng):
            boxes.append(Box((float(x), float(y)), config.vehicle_dims, heading))
    ego = int(rng.integers(len(boxes)))

    wall_y = config.road_width / 2 + config.building_setback
    end = config.canyon_length
    h = config.building_height
    loss = config.reflection_loss_concrete_db
    faces = (
        Face((0.0, -wall_y), (end, -wall_y), h, (0.0, 1.0), loss, "concrete"),
        Face((0.0, wall_y), (end, wall_y), h, (0.0, -1.0), loss, "concrete"),
    )
    rsu = Pose((config.rsu_offset_along_road, config.rsu_lateral, config.rsu_height),
               config.rsu_boresight)
    ego_box = boxes[ego]
    ego_pose = Pose((ego_box.center[0], ego_box.center[1], ego_box.height), ego_box.heading)
    return Scene(faces, tuple(boxes), rsu, ego, ego_pose,
                 vehicle_loss_db=config.reflection_loss_metal_db,
                 radar_mount_height=config.radar_mount_height,
                 bounds=(0.0, end, -wall_y, wall_y))


def boxes_overlap(a: Box, b: Box) -> bool:
    ax0, ax1, ay0, ay1 = a.bounds
    bx0, bx1, by0, by1 = b.bounds
    return ax0 < bx1 and bx0 < ax1 and ay0 < by1 and by0 < ay1
