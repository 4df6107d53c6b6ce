"""Disco-IRS model: random one-bit reflect states and their slot schedule.

Each surface element draws a phase shift from a small discrete distribution;
the reflection amplitude is a fixed function of the chosen phase (index-wise
coupling). One realization over all elements is a :class:`ReflectState`. A
:class:`DirsSchedule` pins one state to the pilot slots and Q fresh states to
the data slots, which is what ages the channel inside a coherence interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ConfigError

if TYPE_CHECKING:
    from .scenario import ScenarioConfig


@dataclass(frozen=True)
class PhaseDistribution:
    """Discrete distribution over reflection coefficients a_i * exp(j*theta_i)."""

    phases_rad: tuple[float, ...]
    amplitudes: tuple[float, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        n = len(self.phases_rad)
        if n < 1 or len(self.amplitudes) != n or len(self.probabilities) != n:
            raise ConfigError("phases, amplitudes and probabilities must share one length >= 1")
        if any(p < 0.0 for p in self.probabilities):
            raise ConfigError("probabilities must be non-negative")
        if abs(sum(self.probabilities) - 1.0) > 1e-12:
            raise ConfigError("probabilities must sum to 1")
        if any(not 0.0 < a <= 1.0 for a in self.amplitudes):
            raise ConfigError("amplitudes must lie in (0, 1]")

    def coeffs(self) -> np.ndarray:
        """The complex reflection coefficients of the support points."""
        a = np.asarray(self.amplitudes, dtype=float)
        th = np.asarray(self.phases_rad, dtype=float)
        return a * np.exp(1j * th)

    def mean_square(self) -> float:
        """E|phi|^2 for one draw."""
        return float(np.sum(np.asarray(self.probabilities) * np.abs(self.coeffs()) ** 2))

    def mean_square_diff(self) -> float:
        """E|phi - phi'|^2 for two independent draws, by exhaustive enumeration."""
        c = self.coeffs()
        p = np.asarray(self.probabilities, dtype=float)
        diff2 = np.abs(c[:, None] - c[None, :]) ** 2
        return float(p @ diff2 @ p)


def case_one() -> PhaseDistribution:
    """One-bit distribution with P(pi/9) = 0.25, P(7*pi/6) = 0.75."""
    return PhaseDistribution(
        phases_rad=(math.pi / 9.0, 7.0 * math.pi / 6.0),
        amplitudes=(0.8, 1.0),
        probabilities=(0.25, 0.75),
    )


def case_two() -> PhaseDistribution:
    """One-bit distribution with equiprobable phases."""
    return PhaseDistribution(
        phases_rad=(math.pi / 9.0, 7.0 * math.pi / 6.0),
        amplitudes=(0.8, 1.0),
        probabilities=(0.5, 0.5),
    )


@dataclass(frozen=True)
class ReflectState:
    """One realization of the diagonal reflecting matrix (stored as a vector)."""

    coeffs: np.ndarray  # complex, shape (n_dirs,)
    slot_tag: str = "dt"

    def __post_init__(self):
        if np.max(np.abs(self.coeffs), initial=0.0) > 1.0 + 1e-12:
            raise ValueError("a passive surface cannot amplify: |coeff| must be <= 1")

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)


def zero_state(n_dirs: int, slot_tag: str = "off") -> ReflectState:
    return ReflectState(coeffs=np.zeros(n_dirs, dtype=complex), slot_tag=slot_tag)


def sample_reflect_state(
    dist: PhaseDistribution,
    n_dirs: int,
    stream: np.random.Generator,
    slot_tag: str = "dt",
) -> ReflectState:
    """Draw one i.i.d. reflect state: element i picks support point with prob p_i."""
    if n_dirs < 1:
        raise ValueError("n_dirs must be >= 1")
    # Inverse-CDF sampling; cheaper than Generator.choice for tiny supports.
    edges = np.cumsum(dist.probabilities)
    idx = np.searchsorted(edges, stream.random(n_dirs), side="right")
    idx = np.minimum(idx, len(edges) - 1)  # guard against u == 1.0 rounding
    return ReflectState(coeffs=dist.coeffs()[idx], slot_tag=slot_tag)


@dataclass(frozen=True)
class DirsSchedule:
    """Reflect states over one coherence interval.

    ``slot_map[t]`` is 0 for the pilot state and 1+q for data block q. Data
    slots are partitioned into Q contiguous blocks of equal length, with any
    remainder going to the last block.
    """

    pt_state: ReflectState
    dt_states: tuple[ReflectState, ...]
    slot_map: np.ndarray  # int, shape (t_c_slots,)

    @property
    def t_c_slots(self) -> int:
        return len(self.slot_map)

    def block_lengths(self) -> np.ndarray:
        """Number of data slots mapped to each of the Q data states."""
        return np.bincount(self.slot_map, minlength=1 + len(self.dt_states))[1:]


def build_schedule(
    cfg: "ScenarioConfig",
    stream: np.random.Generator,
    mode: str | None = None,
    dist: PhaseDistribution | None = None,
) -> DirsSchedule:
    """Construct the per-interval schedule for the configured jamming mode.

    ``mode`` and ``dist`` override the scenario values (used by benchmarks).
    """
    mode = cfg.dirs_mode if mode is None else mode
    dist = cfg.phase_dist if dist is None else dist
    frame = cfg.frame
    n = cfg.n_dirs_elements
    q = frame.q_changes

    if mode != "off" and q < 1:
        raise ConfigError(f"q_changes must be >= 1 in jamming mode '{mode}'")
    if mode == "single_change" and q != 1:
        raise ConfigError("single_change mode requires q_changes == 1")
    q = max(q, 1)
    if frame.t_d_slots < q:
        raise ConfigError(f"cannot partition {frame.t_d_slots} data slots into {q} blocks")

    if mode == "persistent":
        pt = sample_reflect_state(dist, n, stream, slot_tag="pt")
    else:
        # temporal mode absorbs during training; off never reflects at all
        pt = zero_state(n, slot_tag="pt")
    if mode == "off":
        dt = tuple(zero_state(n, slot_tag=f"dt{i}") for i in range(q))
    else:
        dt = tuple(sample_reflect_state(dist, n, stream, slot_tag=f"dt{i}") for i in range(q))

    base = frame.t_d_slots // q
    lengths = [base] * (q - 1) + [frame.t_d_slots - base * (q - 1)]
    slot_map = np.concatenate(
        [np.zeros(frame.t_p_slots, dtype=int)]
        + [np.full(L, 1 + i, dtype=int) for i, L in enumerate(lengths)]
    )
    return DirsSchedule(pt_state=pt, dt_states=dt, slot_map=slot_map)


def state_for_slot(sched: DirsSchedule, slot: int) -> ReflectState:
    """Reflect state active in a given slot of the coherence interval."""
    if not 0 <= slot < sched.t_c_slots:
        raise ValueError(f"slot {slot} outside coherence interval of {sched.t_c_slots} slots")
    idx = int(sched.slot_map[slot])
    return sched.pt_state if idx == 0 else sched.dt_states[idx - 1]
