from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import skillest as sk

settings.register_profile(
    "default",
    deadline=None,
    max_examples=30,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def board_grid():
    return sk.board_action_grid()


@pytest.fixture(scope="session")
def sample_state():
    return sk.generate_state(sk.substream(11, "states"), state_id=0)


@pytest.fixture(scope="session")
def sample_reward(sample_state, board_grid):
    return sk.rasterize_reward(sample_state, board_grid)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def coarse_grid(resolution: float = 10.0):
    """Smaller board grid for fast filter tests (35 x 35 at 10 mm)."""
    return sk.ActionGrid(resolution=resolution, half_extent=170.0)
