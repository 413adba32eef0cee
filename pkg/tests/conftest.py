import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from infrasense.scene import Box, Face, Pose, Scene

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_scene(faces=(), boxes=(), rsu=(0.0, 0.0, 5.0), ego_pos=(10.0, 0.0, 1.6),
               rsu_boresight=0.0, ego_heading=0.0, ego_index=0):
    """Hand-built scene. With no boxes the ego index is nominal and unused."""
    return Scene(tuple(faces), tuple(boxes), Pose(tuple(rsu), rsu_boresight), ego_index,
                 Pose(tuple(ego_pos), ego_heading), bounds=(-1e3, 1e3, -1e3, 1e3))


def wall(y, normal_y, height=20.0, x0=-500.0, x1=500.0, loss_db=6.0):
    return Face((x0, y), (x1, y), height, (0.0, normal_y), loss_db, "concrete")


def box(x, y, dims=(5.0, 2.0, 1.6), heading=0.0):
    return Box((float(x), float(y)), dims, heading)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def on_grid_angle(k, n, spacing=0.5):
    """Azimuth whose steering vector equals DFT bin k of an n-element array."""
    psi = math.remainder(2 * math.pi * k / n, 2 * math.pi)
    return math.asin(psi / (2 * math.pi * spacing))
