"""Fading generation, path loss, and assembly of the per-slot composite channel.

Conventions (fixed once, tested by the 1x1 cascade case):
  * channels are column vectors h; the scalar seen by a receiver is
    h^H x for transmit vector x;
  * per-user channels are stored row-wise in (K, n_ap) arrays, un-conjugated;
  * the composite downlink channel of user k under reflect state phi is
        h_k = h_direct_k + H_ap_dirs^H diag(conj(phi)) h_dirs_lu_k,
    which is linear in phi.

All fading blocks are i.i.d. circularly-symmetric complex Gaussian with
per-entry variance equal to the link's path-loss gain. Fading is static over
one coherence interval; only the reflect state varies inside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import scenario as sc
from .dirs import PhaseDistribution, ReflectState
from .errors import ConfigError
from .scenario import D_MIN_M, PathLossParams, Position3D, RandomStream, ScenarioConfig


@dataclass(frozen=True)
class LinkGain:
    """Linear power attenuation of one link, in (0, 1]."""

    gain: float

    def __post_init__(self):
        if not 0.0 < self.gain <= 1.0:
            raise ValueError(f"link gain must be in (0, 1], got {self.gain}")


def path_loss_gain(d: float, exponent: float, params: PathLossParams) -> LinkGain:
    """Log-distance path loss: gain = 10^(-(ref_loss_db + 10*exp*log10(d))/10)."""
    if d < D_MIN_M:
        raise ValueError(
            f"distance {d:.3f} m is below the near-field clamp {D_MIN_M} m"
        )
    loss_db = params.ref_loss_db + 10.0 * exponent * math.log10(d)
    return LinkGain(10.0 ** (-loss_db / 10.0))


def complex_normal(stream: RandomStream, shape: tuple[int, ...]) -> np.ndarray:
    """Standard circularly-symmetric complex Gaussian draws, CN(0, 1)."""
    z = stream.standard_normal(size=shape + (2,))
    return z.view(np.complex128)[..., 0] * math.sqrt(0.5)


def sample_fading(
    rows: int, cols: int, gain: LinkGain | float, stream: RandomStream
) -> np.ndarray:
    """I.i.d. CN(0, gain) matrix of shape (rows, cols)."""
    if rows < 1 or cols < 1:
        raise ValueError("fading block must have at least one row and column")
    g = gain.gain if isinstance(gain, LinkGain) else float(gain)
    return complex_normal(stream, (rows, cols)) * math.sqrt(g)


@dataclass(frozen=True)
class ChannelSet:
    """All fading realizations of one trial (one coherence interval).

    Rows of ``h_direct`` / ``h_dirs_lu`` are per-user vectors; ``g_aj_lu``
    holds the scalar active-jammer channels used only by the AJ baseline.
    The per-link gains are kept alongside for analytic variance formulas.
    """

    h_direct: np.ndarray        # (K, n_ap)
    H_ap_dirs: np.ndarray       # (n_dirs, n_ap)
    h_dirs_lu: np.ndarray       # (K, n_dirs)
    g_aj_lu: np.ndarray         # (K,)
    direct_gains: np.ndarray    # (K,)
    ap_dirs_gain: float
    dirs_lu_gains: np.ndarray   # (K,)
    aj_lu_gains: np.ndarray     # (K,)

    @property
    def n_users(self) -> int:
        return self.h_direct.shape[0]

    @property
    def n_ap(self) -> int:
        return self.h_direct.shape[1]

    @property
    def n_dirs(self) -> int:
        return self.H_ap_dirs.shape[0]


@dataclass(frozen=True)
class CompositeChannel:
    """Effective downlink vector of one user in one slot."""

    h: np.ndarray  # (n_ap,)
    slot_index: int = 0


def composite_matrix(cs: ChannelSet, phi: ReflectState) -> np.ndarray:
    """Composite channels of all users under ``phi``, stacked row-wise (K, n_ap)."""
    if phi.coeffs.shape != (cs.n_dirs,):
        raise ValueError(
            f"reflect state has {phi.coeffs.shape[0]} elements, channel set {cs.n_dirs}"
        )
    if phi.is_zero:
        return cs.h_direct.copy()
    # Row form of h_k += H^H diag(conj phi) h_dl_k for every user at once.
    return cs.h_direct + (cs.h_dirs_lu * np.conj(phi.coeffs)[None, :]) @ np.conj(cs.H_ap_dirs)


def composite_batch(cs: ChannelSet, states) -> np.ndarray:
    """Composite channels for several reflect states: (n_states, K, n_ap).

    One fused matrix product over all states; each slice equals
    :func:`composite_matrix` for the corresponding state.
    """
    states = list(states)
    coeffs = np.stack([s.coeffs for s in states])
    if coeffs.shape[1] != cs.n_dirs:
        raise ValueError("reflect-state length does not match the channel set")
    if not coeffs.any():
        return np.repeat(cs.h_direct[None, :, :], len(states), axis=0)
    scaled = cs.h_dirs_lu[None, :, :] * np.conj(coeffs)[:, None, :]
    refl = scaled.reshape(-1, cs.n_dirs) @ np.conj(cs.H_ap_dirs)
    return cs.h_direct[None, :, :] + refl.reshape(len(states), cs.n_users, cs.n_ap)


def assemble_composite(
    cs: ChannelSet, user_k: int, phi: ReflectState, slot_index: int = 0
) -> CompositeChannel:
    """Composite channel of a single user under reflect state ``phi``."""
    if not 0 <= user_k < cs.n_users:
        raise ValueError(f"user index {user_k} out of range")
    if phi.coeffs.shape != (cs.n_dirs,):
        raise ValueError(
            f"reflect state has {phi.coeffs.shape[0]} elements, channel set {cs.n_dirs}"
        )
    h = cs.h_direct[user_k] + np.conj(cs.H_ap_dirs).T @ (np.conj(phi.coeffs) * cs.h_dirs_lu[user_k])
    return CompositeChannel(h=h, slot_index=slot_index)


def cascaded_variance(
    g_ap_dirs: LinkGain, g_dirs_lu: LinkGain, phase_dist: PhaseDistribution, n_dirs: int
) -> float:
    """Per-antenna variance of the aging difference h(t_q) - h(t_0).

    For i.i.d. reflect states drawn from ``phase_dist`` in both phases the
    difference channel has i.i.d. entries of variance
    n_dirs * g_ap_dirs * g_dirs_lu * E|phi - phi'|^2.
    """
    if n_dirs < 1:
        raise ValueError("n_dirs must be >= 1")
    return n_dirs * g_ap_dirs.gain * g_dirs_lu.gain * phase_dist.mean_square_diff()


def aging_variance(
    mode: str,
    g_ap_dirs: LinkGain,
    g_dirs_lu: LinkGain,
    phase_dist: PhaseDistribution,
    n_dirs: int,
) -> float:
    """Per-antenna variance of the channel perturbation seen after training.

    In temporal mode the surface absorbs during training, so the perturbation
    is the full reflected channel (E|phi|^2 instead of E|phi - phi'|^2).
    """
    if mode == "off":
        return 0.0
    if mode == "temporal":
        return n_dirs * g_ap_dirs.gain * g_dirs_lu.gain * phase_dist.mean_square()
    if mode in ("persistent", "single_change"):
        return cascaded_variance(g_ap_dirs, g_dirs_lu, phase_dist, n_dirs)
    raise ConfigError(f"unknown dirs mode '{mode}'")


def link_gains(cfg: ScenarioConfig, lu_positions: Sequence[Position3D]):
    """Per-link gains for one user drop: (direct (K,), ap_dirs, dirs_lu (K,), aj (K,))."""
    pl = cfg.path_loss
    direct = np.array(
        [path_loss_gain(sc.distance(cfg.ap_pos, p), pl.exp_direct, pl).gain for p in lu_positions]
    )
    ap_dirs = path_loss_gain(sc.distance(cfg.ap_pos, cfg.dirs_pos), pl.exp_ap_dirs, pl).gain
    dirs_lu = np.array(
        [path_loss_gain(sc.distance(cfg.dirs_pos, p), pl.exp_dirs_lu, pl).gain for p in lu_positions]
    )
    aj = np.array(
        [path_loss_gain(sc.distance(cfg.aj_pos, p), pl.exp_aj_lu, pl).gain for p in lu_positions]
    )
    return direct, ap_dirs, dirs_lu, aj


def draw_channel_set(
    cfg: ScenarioConfig,
    lu_positions: Sequence[Position3D],
    trial_index: int,
    with_cascade: bool = True,
) -> ChannelSet:
    """Draw all fading blocks of one trial from their dedicated streams.

    With ``with_cascade=False`` the surface-related blocks are left all-zero
    without consuming their streams; since every block has its own derived
    stream this cannot perturb any other draw (used when the surface is off).
    """
    k, n_ap, n_dirs = cfg.n_users, cfg.n_ap_antennas, cfg.n_dirs_elements
    g_direct, g_ap_dirs, g_dirs_lu, g_aj = link_gains(cfg, lu_positions)
    seed = cfg.master_seed

    unit = LinkGain(1.0)
    h_direct = sample_fading(k, n_ap, unit, sc.derive_stream(seed, trial_index, "fading_direct"))
    h_direct *= np.sqrt(g_direct)[:, None]
    if with_cascade:
        H_ap_dirs = sample_fading(
            n_dirs, n_ap, LinkGain(g_ap_dirs), sc.derive_stream(seed, trial_index, "fading_ap_dirs")
        )
        h_dirs_lu = sample_fading(
            k, n_dirs, unit, sc.derive_stream(seed, trial_index, "fading_dirs_lu")
        )
        h_dirs_lu *= np.sqrt(g_dirs_lu)[:, None]
    else:
        H_ap_dirs = np.zeros((n_dirs, n_ap), dtype=complex)
        h_dirs_lu = np.zeros((k, n_dirs), dtype=complex)
    g_aj_lu = sample_fading(k, 1, unit, sc.derive_stream(seed, trial_index, "fading_aj"))[:, 0]
    g_aj_lu *= np.sqrt(g_aj)

    return ChannelSet(
        h_direct=h_direct,
        H_ap_dirs=H_ap_dirs,
        h_dirs_lu=h_dirs_lu,
        g_aj_lu=g_aj_lu,
        direct_gains=g_direct,
        ap_dirs_gain=g_ap_dirs,
        dirs_lu_gains=g_dirs_lu,
        aj_lu_gains=g_aj,
    )
