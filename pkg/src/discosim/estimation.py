"""Channel acquisition and the power-feedback frame used by the anti-jammer.

Training runs uplink-style: users send orthogonal pilots, the access point
observes them through the reciprocal channel and least-squares inverts the
pilot matrix. Afterwards, during data transmission, each user can report its
average received power; the excess of that power over what the trained
channels predict, divided by the total transmit power, is a moment estimator
of the per-antenna perturbation variance delta_k^2 used by the anti-jamming
precoder:

    E[p_k] = sum_u |h_k^H w_u|^2 + delta_k^2 * P0 + noise.

Estimates from successive feedback rounds are combined by a running mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import CompositeChannel, complex_normal
from .errors import ConfigError
from .precoding import ChannelEstimate, DeltaEstimates, Precoder
from .scenario import RandomStream

# Unit-power QPSK constellation used for power-probe symbols.
_QPSK = np.exp(1j * np.pi * (2.0 * np.arange(4) + 1.0) / 4.0)


@dataclass(frozen=True)
class PilotBlock:
    """Joint uplink training observation: pilots (K, T_P), received (n_ap, T_P)."""

    pilot_matrix: np.ndarray
    received: np.ndarray

    def __post_init__(self):
        k, t_p = self.pilot_matrix.shape
        if t_p < k:
            raise ConfigError(f"pilot length {t_p} shorter than user count {k}")
        gram = self.pilot_matrix @ np.conj(self.pilot_matrix).T
        off = gram - np.diag(np.diag(gram))
        if np.max(np.abs(off), initial=0.0) > 1e-9 * np.max(np.abs(np.diag(gram))):
            raise ConfigError("pilot rows must be mutually orthogonal")
        if self.received.shape[1] != t_p:
            raise ConfigError("received block length must match pilot length")


def make_pilot_matrix(n_users: int, t_p: int, p0: float) -> np.ndarray:
    """Orthogonal unit-modulus pilot rows (first K rows of a DFT), power P0/K per symbol."""
    if t_p < n_users:
        raise ConfigError(f"pilot length {t_p} shorter than user count {n_users}")
    grid = np.outer(np.arange(n_users), np.arange(t_p))
    return np.sqrt(p0 / n_users) * np.exp(-2j * np.pi * grid / t_p)


def transmit_pilots(
    h_true: np.ndarray, pilots: np.ndarray, noise_var: float, stream: RandomStream
) -> PilotBlock:
    """Observe pilots through the reciprocal channel with receiver noise."""
    n_ap = h_true.shape[1]
    t_p = pilots.shape[1]
    noise = complex_normal(stream, (n_ap, t_p)) * np.sqrt(noise_var)
    received = h_true.T @ pilots + noise
    return PilotBlock(pilot_matrix=pilots, received=received)


def ls_estimate(pb: PilotBlock) -> ChannelEstimate:
    """Least-squares channel estimate; exact when the observation is noiseless."""
    x = pb.pilot_matrix
    gram = x @ np.conj(x).T
    # PilotBlock guarantees orthogonal rows, so the Gram matrix is diagonal.
    diag = np.real(np.diag(gram))
    if np.min(diag) <= 1e-12 * np.max(diag):
        raise ConfigError("pilot matrix is rank deficient")
    h_cols = pb.received @ np.conj(x).T / diag[None, :]
    return ChannelEstimate(h_pt=h_cols.T)


@dataclass(frozen=True)
class PowerFeedback:
    """Received power values (watts) reported by the K users in round s."""

    round_index: int
    p: np.ndarray  # (K,), non-negative

    def __post_init__(self):
        if self.round_index < 1:
            raise ValueError("round_index starts at 1")
        if np.any(self.p < 0.0):
            raise ValueError("received powers must be non-negative")


def _stack_channels(h_true) -> np.ndarray:
    if isinstance(h_true, np.ndarray):
        return h_true
    return np.stack([h.h if isinstance(h, CompositeChannel) else np.asarray(h) for h in h_true])


def measure_received_power(
    h_true: np.ndarray | Sequence[CompositeChannel],
    pre: Precoder,
    noise_var: float,
    stream: RandomStream,
    n_symbols: int,
    round_index: int = 1,
) -> PowerFeedback:
    """Per-user average received power over ``n_symbols`` data symbols.

    Unit-power i.i.d. QPSK probe symbols are sent on all streams; each user
    averages |h_k^H sum_u w_u s_u + n|^2. As n_symbols grows this converges
    to sum_u |h_k^H w_u|^2 + noise_var.
    """
    if n_symbols < 1:
        raise ValueError("n_symbols must be >= 1")
    h = _stack_channels(h_true)
    k = h.shape[0]
    gains = np.conj(h) @ pre.w  # (K, K): entry [k, u] = h_k^H w_u
    symbols = _QPSK[stream.integers(0, 4, size=(pre.n_users, n_symbols))]
    rx = gains @ symbols
    if noise_var > 0.0:
        rx = rx + complex_normal(stream, (k, n_symbols)) * np.sqrt(noise_var)
    p = np.mean(np.abs(rx) ** 2, axis=1)
    return PowerFeedback(round_index=round_index, p=p)


def estimate_delta(
    fb: PowerFeedback,
    est: ChannelEstimate,
    pre: Precoder,
    noise_var: float,
    p0: float,
    prior: DeltaEstimates | None = None,
) -> DeltaEstimates:
    """Moment estimate of delta_k^2 from one feedback round.

    raw_k = max(0, p_k - sum_u |h_est_k^H w_u|^2 - noise) / P0; with a prior
    (the mean over rounds 1..s-1) the output is the running mean over rounds
    1..s. Never negative thanks to the clamp.
    """
    predicted = np.sum(np.abs(np.conj(est.h_pt) @ pre.w) ** 2, axis=1)
    raw = np.maximum(0.0, fb.p - predicted - noise_var) / p0
    if prior is None:
        return DeltaEstimates(delta_sq=raw)
    s = fb.round_index
    return DeltaEstimates(delta_sq=((s - 1) * prior.delta_sq + raw) / s)


def detect_jamming(sjnr_pt: float, sjnr_dt: float, threshold_db: float) -> bool:
    """True iff the ratio of training-phase to data-phase SJNR exceeds the
    threshold: 10*log10(sjnr_pt / sjnr_dt) > threshold_db (strict)."""
    if sjnr_pt <= 0.0 or sjnr_dt <= 0.0:
        raise ValueError("SJNR values must be positive")
    return bool(10.0 * math.log10(sjnr_pt / sjnr_dt) > threshold_db)
