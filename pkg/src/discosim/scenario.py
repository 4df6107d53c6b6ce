"""Scenario description: geometry, powers, frame schedule, and random streams.

All powers are accepted in dBm and converted to linear watts for internal
bookkeeping. Every stochastic operation in the simulator draws from a stream
derived from ``(master_seed, trial_index, purpose_tag)``, so the full
experiment is a pure function of the scenario configuration and adding or
removing a benchmark never perturbs another benchmark's randomness.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import ConfigError

if TYPE_CHECKING:
    from .dirs import PhaseDistribution

# Streams are plain numpy generators; the alias documents intent in signatures.
RandomStream = np.random.Generator

DIRS_MODES = ("persistent", "temporal", "single_change", "off")
JAMMING_MODES = ("persistent", "temporal", "single_change")
CSI_MODES = ("perfect", "ls")

# Log-distance path loss is referenced to 1 m; shorter links are rejected.
D_MIN_M = 1.0


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0.0:
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * math.log10(watts) + 30.0


@dataclass(frozen=True)
class Position3D:
    """A point in meters; z is height above ground."""

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


def distance(a: Position3D, b: Position3D) -> float:
    """Euclidean distance in meters."""
    return math.sqrt((a.x - b.x) ** 2 + (a.y - b.y) ** 2 + (a.z - b.z) ** 2)


@dataclass(frozen=True)
class FrameSchedule:
    """Slot bookkeeping for one coherence interval.

    The interval consists of ``t_p_slots`` pilot slots followed by
    ``c_ratio * t_p_slots`` data slots. The reflecting surface changes state
    ``q_changes`` times during the data phase and the users report received
    power ``m_feedbacks`` times.
    """

    t_p_slots: int
    c_ratio: int
    q_changes: int
    m_feedbacks: int

    def __post_init__(self):
        if self.t_p_slots < 1:
            raise ConfigError("t_p_slots must be >= 1")
        if self.c_ratio < 1:
            raise ConfigError("c_ratio must be >= 1")
        if self.q_changes < 0:
            raise ConfigError("q_changes must be >= 0")
        if not 1 <= self.m_feedbacks <= max(self.q_changes, 1):
            raise ConfigError(
                f"m_feedbacks must be in [1, q_changes], got m={self.m_feedbacks} "
                f"with q_changes={self.q_changes}"
            )

    @property
    def t_d_slots(self) -> int:
        return self.c_ratio * self.t_p_slots

    @property
    def t_c_slots(self) -> int:
        return self.t_p_slots + self.t_d_slots


@dataclass(frozen=True)
class PathLossParams:
    """Log-distance path-loss model: loss_dB(d) = ref_loss_db + 10*exp*log10(d)."""

    ref_loss_db: float = 30.0
    exp_direct: float = 3.5
    exp_ap_dirs: float = 2.2
    exp_dirs_lu: float = 3.9
    exp_aj_lu: float = 3.5

    def __post_init__(self):
        if self.ref_loss_db <= 0.0:
            raise ConfigError("ref_loss_db must be positive")
        for name in ("exp_direct", "exp_ap_dirs", "exp_dirs_lu", "exp_aj_lu"):
            if getattr(self, name) < 2.0:
                raise ConfigError(f"{name} must be >= 2.0")


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one experiment.

    ``aj_power_dbm`` may be None when no active-jammer benchmark is run.
    """

    n_ap_antennas: int
    n_dirs_elements: int
    n_users: int
    ap_pos: Position3D
    dirs_pos: Position3D
    aj_pos: Position3D
    lu_region_center: Position3D
    lu_region_radius: float
    total_power_dbm: float
    noise_power_dbm: float
    aj_power_dbm: float | None
    frame: FrameSchedule
    phase_dist: "PhaseDistribution"
    dirs_mode: str
    path_loss: PathLossParams
    n_trials: int
    master_seed: int
    csi_mode: str = "perfect"
    detection_threshold_db: float = 3.0
    n_power_symbols: int = 2000

    def __post_init__(self):
        if not self.n_ap_antennas >= self.n_users >= 1:
            raise ConfigError(
                f"need n_ap_antennas >= n_users >= 1, got "
                f"{self.n_ap_antennas} antennas, {self.n_users} users"
            )
        if self.n_dirs_elements < 1:
            raise ConfigError("n_dirs_elements must be >= 1")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if not self.lu_region_radius > 0.0:
            raise ConfigError("lu_region_radius must be positive")
        for name in ("total_power_dbm", "noise_power_dbm"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if self.aj_power_dbm is not None and not math.isfinite(self.aj_power_dbm):
            raise ConfigError("aj_power_dbm must be finite or omitted")
        if self.dirs_mode not in DIRS_MODES:
            raise ConfigError(f"dirs_mode must be one of {DIRS_MODES}")
        if self.csi_mode not in CSI_MODES:
            raise ConfigError(f"csi_mode must be one of {CSI_MODES}")
        if self.n_power_symbols < 1:
            raise ConfigError("n_power_symbols must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")

    @property
    def total_power_w(self) -> float:
        return dbm_to_watts(self.total_power_dbm)

    @property
    def noise_power_w(self) -> float:
        return dbm_to_watts(self.noise_power_dbm)

    @property
    def aj_power_w(self) -> float:
        if self.aj_power_dbm is None:
            raise ConfigError("aj_power_dbm is not set in this scenario")
        return dbm_to_watts(self.aj_power_dbm)


def derive_stream(master_seed: int, trial_index: int, purpose_tag: str) -> RandomStream:
    """Deterministic, statistically independent substream for one purpose.

    The tag is hashed with a fixed (non-salted) hash so streams are stable
    across processes and platforms. Distinct (trial, tag) pairs give
    independent generators.
    """
    digest = hashlib.blake2b(purpose_tag.encode("utf-8"), digest_size=8).digest()
    tag_words = (
        int.from_bytes(digest[:4], "little"),
        int.from_bytes(digest[4:], "little"),
    )
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index, *tag_words))
    return np.random.default_rng(ss)


def place_users(cfg: ScenarioConfig, stream: RandomStream) -> list[Position3D]:
    """Drop the K users uniformly on the configured disk (z fixed)."""
    center = cfg.lu_region_center
    u = stream.uniform(size=cfg.n_users)
    theta = stream.uniform(0.0, 2.0 * math.pi, size=cfg.n_users)
    r = cfg.lu_region_radius * np.sqrt(u)
    return [
        Position3D(center.x + ri * math.cos(ti), center.y + ri * math.sin(ti), center.z)
        for ri, ti in zip(r, theta)
    ]


# ---------------------------------------------------------------------------
# JSON (de)serialization. Unknown keys are rejected at every nesting level so
# a typo in a config file fails loudly instead of silently using a default.
# ---------------------------------------------------------------------------

_POSITION_FIELDS = ("ap_pos", "dirs_pos", "aj_pos", "lu_region_center")


def _position_from_json(name: str, value) -> Position3D:
    if not (isinstance(value, (list, tuple)) and len(value) == 3):
        raise ConfigError(f"{name} must be a [x, y, z] triple in meters")
    return Position3D(*(float(v) for v in value))


def _pop_section(data: dict, name: str, allowed: tuple[str, ...]) -> dict:
    section = data.pop(name, None)
    if section is None:
        raise ConfigError(f"missing required config section '{name}'")
    if not isinstance(section, dict):
        raise ConfigError(f"config section '{name}' must be an object")
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {sorted(unknown)}")
    return section


def scenario_from_dict(data: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from a parsed JSON object (strict keys)."""
    from .dirs import PhaseDistribution

    data = dict(data)
    frame = _pop_section(data, "frame", ("t_p_slots", "c_ratio", "q_changes", "m_feedbacks"))
    phase = _pop_section(data, "phase_dist", ("phases_rad", "amplitudes", "probabilities"))
    path = _pop_section(
        data,
        "path_loss",
        ("ref_loss_db", "exp_direct", "exp_ap_dirs", "exp_dirs_lu", "exp_aj_lu"),
    )

    known = {
        "n_ap_antennas", "n_dirs_elements", "n_users",
        "ap_pos", "dirs_pos", "aj_pos", "lu_region_center", "lu_region_radius",
        "total_power_dbm", "noise_power_dbm", "aj_power_dbm",
        "dirs_mode", "n_trials", "master_seed",
        "csi_mode", "detection_threshold_db", "n_power_symbols",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = known - set(data) - {"aj_power_dbm", "csi_mode", "detection_threshold_db", "n_power_symbols"}
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")

    positions = {name: _position_from_json(name, data[name]) for name in _POSITION_FIELDS}
    aj_power = data.get("aj_power_dbm")
    return ScenarioConfig(
        n_ap_antennas=int(data["n_ap_antennas"]),
        n_dirs_elements=int(data["n_dirs_elements"]),
        n_users=int(data["n_users"]),
        lu_region_radius=float(data["lu_region_radius"]),
        total_power_dbm=float(data["total_power_dbm"]),
        noise_power_dbm=float(data["noise_power_dbm"]),
        aj_power_dbm=None if aj_power is None else float(aj_power),
        frame=FrameSchedule(**{k: int(v) for k, v in frame.items()}),
        phase_dist=PhaseDistribution(
            phases_rad=tuple(float(v) for v in phase["phases_rad"]),
            amplitudes=tuple(float(v) for v in phase["amplitudes"]),
            probabilities=tuple(float(v) for v in phase["probabilities"]),
        ),
        dirs_mode=str(data["dirs_mode"]),
        path_loss=PathLossParams(**{k: float(v) for k, v in path.items()}),
        n_trials=int(data["n_trials"]),
        master_seed=int(data["master_seed"]),
        csi_mode=str(data.get("csi_mode", "perfect")),
        detection_threshold_db=float(data.get("detection_threshold_db", 3.0)),
        n_power_symbols=int(data.get("n_power_symbols", 2000)),
        **positions,
    )


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    """Inverse of :func:`scenario_from_dict`."""
    return {
        "n_ap_antennas": cfg.n_ap_antennas,
        "n_dirs_elements": cfg.n_dirs_elements,
        "n_users": cfg.n_users,
        "ap_pos": [cfg.ap_pos.x, cfg.ap_pos.y, cfg.ap_pos.z],
        "dirs_pos": [cfg.dirs_pos.x, cfg.dirs_pos.y, cfg.dirs_pos.z],
        "aj_pos": [cfg.aj_pos.x, cfg.aj_pos.y, cfg.aj_pos.z],
        "lu_region_center": [
            cfg.lu_region_center.x, cfg.lu_region_center.y, cfg.lu_region_center.z,
        ],
        "lu_region_radius": cfg.lu_region_radius,
        "total_power_dbm": cfg.total_power_dbm,
        "noise_power_dbm": cfg.noise_power_dbm,
        "aj_power_dbm": cfg.aj_power_dbm,
        "frame": {
            "t_p_slots": cfg.frame.t_p_slots,
            "c_ratio": cfg.frame.c_ratio,
            "q_changes": cfg.frame.q_changes,
            "m_feedbacks": cfg.frame.m_feedbacks,
        },
        "phase_dist": {
            "phases_rad": list(cfg.phase_dist.phases_rad),
            "amplitudes": list(cfg.phase_dist.amplitudes),
            "probabilities": list(cfg.phase_dist.probabilities),
        },
        "dirs_mode": cfg.dirs_mode,
        "path_loss": {
            "ref_loss_db": cfg.path_loss.ref_loss_db,
            "exp_direct": cfg.path_loss.exp_direct,
            "exp_ap_dirs": cfg.path_loss.exp_ap_dirs,
            "exp_dirs_lu": cfg.path_loss.exp_dirs_lu,
            "exp_aj_lu": cfg.path_loss.exp_aj_lu,
        },
        "n_trials": cfg.n_trials,
        "master_seed": cfg.master_seed,
        "csi_mode": cfg.csi_mode,
        "detection_threshold_db": cfg.detection_threshold_db,
        "n_power_symbols": cfg.n_power_symbols,
    }
