"""Tests for geometry, unit conversion, random streams, and config parsing."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from discosim.errors import ConfigError
from discosim.scenario import (
    FrameSchedule,
    Position3D,
    ScenarioConfig,
    dbm_to_watts,
    derive_stream,
    distance,
    place_users,
    scenario_from_dict,
    scenario_to_dict,
    watts_to_dbm,
)

finite_coord = st.floats(-1e4, 1e4, allow_nan=False, allow_infinity=False)


class TestDistance:
    def test_ap_to_dirs_geometry(self):
        assert distance(Position3D(0, 0, 5), Position3D(-2, 0, 5)) == 2.0

    def test_identity(self):
        p = Position3D(1.5, -3.0, 12.0)
        assert distance(p, p) == 0.0

    def test_pythagorean(self):
        # hand evaluation: sqrt(3^2 + 4^2) = 5
        assert distance(Position3D(0, 0, 0), Position3D(3, 4, 0)) == 5.0

    @given(finite_coord, finite_coord, finite_coord, finite_coord, finite_coord, finite_coord)
    def test_symmetric_nonnegative(self, ax, ay, az, bx, by, bz):
        a, b = Position3D(ax, ay, az), Position3D(bx, by, bz)
        assert distance(a, b) >= 0.0
        assert distance(a, b) == distance(b, a)


class TestDbmConversion:
    def test_known_values(self):
        assert dbm_to_watts(30.0) == pytest.approx(1.0, rel=1e-12)
        assert dbm_to_watts(-4.0) == pytest.approx(3.9810717055349695e-4, rel=1e-12)

    @given(st.floats(-150.0, 60.0, allow_nan=False))
    def test_round_trip(self, dbm):
        assert watts_to_dbm(dbm_to_watts(dbm)) == pytest.approx(dbm, rel=1e-12, abs=1e-12)

    def test_nonpositive_watts_rejected(self):
        with pytest.raises(ValueError):
            watts_to_dbm(0.0)


class TestDeriveStream:
    def test_same_inputs_identical(self):
        a = derive_stream(42, 0, "direct").random(1000)
        b = derive_stream(42, 0, "direct").random(1000)
        assert np.array_equal(a, b)

    def test_distinct_trials_differ(self):
        a = derive_stream(42, 0, "direct").random(1000)
        b = derive_stream(42, 1, "direct").random(1000)
        assert not np.array_equal(a, b)

    def test_distinct_tags_differ(self):
        a = derive_stream(42, 0, "direct").random(1000)
        b = derive_stream(42, 0, "dirs").random(1000)
        assert not np.array_equal(a, b)

    def test_distinct_seeds_differ(self):
        a = derive_stream(42, 0, "direct").random(1000)
        b = derive_stream(43, 0, "direct").random(1000)
        assert not np.array_equal(a, b)


class TestPlaceUsers:
    def test_inside_disk_fixed_z(self, tiny_scenario):
        cfg = tiny_scenario(n_users=6, n_ap_antennas=8, lu_region_radius=20.0)
        users = place_users(cfg, derive_stream(1, 0, "drop"))
        assert len(users) == 6
        for p in users:
            assert distance(p, cfg.lu_region_center) <= 20.0
            assert p.z == cfg.lu_region_center.z

    def test_degenerate_disk(self, tiny_scenario):
        cfg = tiny_scenario(lu_region_radius=1e-12)
        users = place_users(cfg, derive_stream(1, 0, "drop"))
        for p in users:
            assert distance(p, cfg.lu_region_center) <= 1e-12

    def test_empirical_mean_near_center(self, tiny_scenario):
        # Monte Carlo oracle: mean of a uniform disk is its center; with 1e5
        # draws the standard error per axis is 20/2/sqrt(1e5) = 0.03 m.
        cfg = tiny_scenario(n_users=100, n_ap_antennas=100)
        stream = derive_stream(3, 0, "drop")
        pts = np.array(
            [[p.x, p.y] for _ in range(1000) for p in place_users(cfg, stream)]
        )
        assert pts.shape == (100_000, 2)
        center = np.array([cfg.lu_region_center.x, cfg.lu_region_center.y])
        assert np.linalg.norm(pts.mean(axis=0) - center) < 0.5


class TestFrameSchedule:
    def test_derived_lengths(self):
        f = FrameSchedule(t_p_slots=4, c_ratio=4, q_changes=4, m_feedbacks=2)
        assert f.t_d_slots == 16
        assert f.t_c_slots == 20

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(t_p_slots=0, c_ratio=1, q_changes=1, m_feedbacks=1),
            dict(t_p_slots=1, c_ratio=0, q_changes=1, m_feedbacks=1),
            dict(t_p_slots=1, c_ratio=1, q_changes=2, m_feedbacks=3),
            dict(t_p_slots=1, c_ratio=1, q_changes=1, m_feedbacks=0),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            FrameSchedule(**kwargs)


class TestScenarioValidation:
    def test_users_exceed_antennas(self, tiny_scenario):
        with pytest.raises(ConfigError):
            tiny_scenario(n_users=7, n_ap_antennas=6)

    def test_bad_radius(self, tiny_scenario):
        with pytest.raises(ConfigError):
            tiny_scenario(lu_region_radius=0.0)

    def test_bad_mode(self, tiny_scenario):
        with pytest.raises(ConfigError):
            tiny_scenario(dirs_mode="sometimes")

    def test_nonfinite_power(self, tiny_scenario):
        with pytest.raises(ConfigError):
            tiny_scenario(total_power_dbm=float("inf"))

    def test_power_properties(self, tiny_scenario):
        cfg = tiny_scenario(total_power_dbm=0.0, noise_power_dbm=-30.0)
        assert cfg.total_power_w == pytest.approx(1e-3, rel=1e-12)
        assert cfg.noise_power_w == pytest.approx(1e-6, rel=1e-12)

    def test_missing_aj_power_property(self, tiny_scenario):
        cfg = tiny_scenario(aj_power_dbm=None)
        with pytest.raises(ConfigError):
            cfg.aj_power_w


class TestJsonConfig:
    def test_round_trip(self, tiny_scenario):
        cfg = tiny_scenario()
        again = scenario_from_dict(scenario_to_dict(cfg))
        assert again == cfg

    def test_round_trip_through_json_text(self, tiny_scenario):
        cfg = tiny_scenario(aj_power_dbm=None)
        again = scenario_from_dict(json.loads(json.dumps(scenario_to_dict(cfg))))
        assert again == cfg

    def test_unknown_key_rejected(self, tiny_scenario):
        data = scenario_to_dict(tiny_scenario())
        data["n_ap_antenas"] = data.pop("n_ap_antennas")  # typo
        with pytest.raises(ConfigError, match="unknown|missing"):
            scenario_from_dict(data)

    def test_unknown_nested_key_rejected(self, tiny_scenario):
        data = scenario_to_dict(tiny_scenario())
        data["frame"]["tp_slots"] = data["frame"].pop("t_p_slots")
        with pytest.raises(ConfigError, match="unknown keys in 'frame'"):
            scenario_from_dict(data)

    def test_missing_key_rejected(self, tiny_scenario):
        data = scenario_to_dict(tiny_scenario())
        del data["noise_power_dbm"]
        with pytest.raises(ConfigError, match="missing"):
            scenario_from_dict(data)

    def test_bad_position_shape(self, tiny_scenario):
        data = scenario_to_dict(tiny_scenario())
        data["ap_pos"] = [0.0, 0.0]
        with pytest.raises(ConfigError, match="triple"):
            scenario_from_dict(data)
