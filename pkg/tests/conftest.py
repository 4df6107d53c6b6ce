import math

import numpy as np
import pytest

from discosim.dirs import PhaseDistribution
from discosim.scenario import (
    FrameSchedule,
    PathLossParams,
    Position3D,
    ScenarioConfig,
)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_scenario():
    """Factory for a small, fast scenario (override any field)."""

    def make(**overrides):
        defaults = dict(
            n_ap_antennas=6,
            n_dirs_elements=32,
            n_users=3,
            ap_pos=Position3D(0.0, 0.0, 5.0),
            dirs_pos=Position3D(-2.0, 0.0, 5.0),
            aj_pos=Position3D(-2.0, 0.0, 5.0),
            lu_region_center=Position3D(0.0, 180.0, 0.0),
            lu_region_radius=20.0,
            total_power_dbm=-2.0 + 10.0 * math.log10(3.0),
            noise_power_dbm=-112.0,
            aj_power_dbm=-4.0,
            frame=FrameSchedule(t_p_slots=3, c_ratio=3, q_changes=3, m_feedbacks=2),
            phase_dist=PhaseDistribution(
                phases_rad=(math.pi / 9.0, 7.0 * math.pi / 6.0),
                amplitudes=(0.8, 1.0),
                probabilities=(0.25, 0.75),
            ),
            dirs_mode="persistent",
            path_loss=PathLossParams(),
            n_trials=4,
            master_seed=7,
        )
        defaults.update(overrides)
        return ScenarioConfig(**defaults)

    return make
