"""Downlink precoders: zero-forcing and the statistical anti-jamming precoder.

The anti-jamming precoder treats the aged channel of user k as its trained
value plus an i.i.d. CN(0, delta_k^2) perturbation per antenna and maximizes
the resulting statistical signal-to-jamming-plus-noise ratio. For each user
this is a Hermitian-definite generalized eigenproblem

    w_k = argmax_w  (w^H A_k w) / (w^H B_k w),
    A_k = h_k h_k^H + delta_k^2 I,
    B_k = H_k~ H_k~^H + (noise * K / P0 + sum_{u != k} delta_u^2) I,

where H_k~ stacks the co-user trained channels. With all delta = 0 this
reduces to the per-user max-SLNR (regularized ZF) direction.

Every returned direction has its largest-modulus entry rotated to be real
positive so outputs are reproducible and comparable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SingularMatrixError

# Two generalized eigenvalues closer than this (relative) are treated as tied.
_TIE_TOL = 1e-10


@dataclass(frozen=True)
class ChannelEstimate:
    """Trained per-user channels from the pilot phase, stacked row-wise (K, n_ap)."""

    h_pt: np.ndarray

    def __post_init__(self):
        if not (np.all(np.isfinite(self.h_pt.real)) and np.all(np.isfinite(self.h_pt.imag))):
            raise ValueError("channel estimate contains non-finite entries")
        k, n_ap = self.h_pt.shape
        if k > n_ap:
            raise ValueError(f"need n_users <= n_ap_antennas, got {k} > {n_ap}")

    @property
    def n_users(self) -> int:
        return self.h_pt.shape[0]

    def co_channels(self, k: int) -> np.ndarray:
        """Columns are the trained channels of all users except k: (n_ap, K-1)."""
        return np.delete(self.h_pt, k, axis=0).T


@dataclass(frozen=True)
class DeltaEstimates:
    """Per-user per-antenna variances of the jammed-channel perturbation."""

    delta_sq: np.ndarray  # (K,), non-negative

    def __post_init__(self):
        if np.any(self.delta_sq < 0.0):
            raise ValueError("delta_sq entries must be non-negative")

    @classmethod
    def zeros(cls, k: int) -> "DeltaEstimates":
        return cls(delta_sq=np.zeros(k))


@dataclass(frozen=True)
class Precoder:
    """K beamforming vectors as columns of ``w`` (n_ap, K); total power P0."""

    w: np.ndarray
    label: str = ""

    def total_power(self) -> float:
        return float(np.sum(np.abs(self.w) ** 2))

    @property
    def n_users(self) -> int:
        return self.w.shape[1]


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate so the largest-modulus entry is real positive."""
    i = int(np.argmax(np.abs(v)))
    pivot = v[i]
    if pivot == 0:
        return v
    return v * (np.conj(pivot) / abs(pivot))


def zf_precoder(est: ChannelEstimate, p0: float) -> Precoder:
    """Zero-forcing directions from the right pseudo-inverse, power P0/K each.

    Raises :class:`SingularMatrixError` when the stacked channel matrix is
    rank deficient.
    """
    hh = np.conj(est.h_pt)  # rows are h_k^H
    k = est.n_users
    u, s, vh = np.linalg.svd(hh, full_matrices=False)
    if s[-1] <= max(hh.shape) * np.finfo(float).eps * s[0]:
        cond = np.inf if s[-1] == 0.0 else s[0] / s[-1]
        raise SingularMatrixError("stacked channel matrix is rank deficient", cond)
    w = (np.conj(vh).T / s[None, :]) @ np.conj(u).T  # right pseudo-inverse, (n_ap, K)
    w /= np.linalg.norm(w, axis=0, keepdims=True)
    w = np.stack([_fix_phase(w[:, i]) for i in range(k)], axis=1)
    return Precoder(w=w * np.sqrt(p0 / k), label="zf")


def max_generalized_eigenvector(
    a: np.ndarray, b: np.ndarray, assume_b_pd: bool = False
) -> np.ndarray:
    """Unit-norm argmax of the generalized Rayleigh quotient w^H A w / w^H B w.

    ``a`` must be Hermitian PSD and ``b`` Hermitian positive definite. When
    the top eigenvalue is degenerate (within 1e-10 relative), the candidate
    whose phase-fixed form is lexicographically smallest in interleaved
    (real, imag) order is returned, so ties break deterministically.

    ``assume_b_pd`` skips the conditioning check for callers that construct
    B with an explicit positive diagonal loading.
    """
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError("A and B must be square matrices of equal size")
    if not assume_b_pd:
        b_eigs = np.linalg.eigvalsh(b)
        if b_eigs[0] <= 1e-12 * max(b_eigs[-1], np.finfo(float).tiny):
            cond = np.inf if b_eigs[0] <= 0 else b_eigs[-1] / b_eigs[0]
            raise SingularMatrixError("B matrix is numerically singular", cond)

    vals, vecs = scipy.linalg.eigh(a, b, check_finite=False)  # ascending eigenvalues
    top = vals[-1]
    scale = max(abs(top), 1e-300)
    if len(vals) == 1 or vals[-2] < top - _TIE_TOL * scale:
        v = vecs[:, -1]
        return _fix_phase(v / np.linalg.norm(v))
    tied = np.flatnonzero(vals >= top - _TIE_TOL * scale)
    candidates = []
    for i in tied:
        v = vecs[:, i]
        v = v / np.linalg.norm(v)
        candidates.append(_fix_phase(v))
    keys = [tuple(np.column_stack([c.real, c.imag]).ravel()) for c in candidates]
    return candidates[min(range(len(candidates)), key=keys.__getitem__)]


def ajp_precoder(
    est: ChannelEstimate, deltas: DeltaEstimates, noise_var: float, p0: float
) -> Precoder:
    """Anti-jamming precoder from trained channels and perturbation variances."""
    if p0 <= 0.0 or noise_var <= 0.0:
        raise ValueError("p0 and noise_var must be positive")
    k, n_ap = est.h_pt.shape
    if deltas.delta_sq.shape != (k,):
        raise ValueError("need one delta_sq per user")
    eye = np.eye(n_ap)
    total_delta = float(np.sum(deltas.delta_sq))
    cols = []
    for i in range(k):
        h = est.h_pt[i]
        a = np.outer(h, np.conj(h)) + deltas.delta_sq[i] * eye
        co = est.co_channels(i)
        loading = noise_var * k / p0 + (total_delta - deltas.delta_sq[i])
        b = co @ np.conj(co).T + loading * eye
        # B carries a strictly positive diagonal loading, so it is PD.
        cols.append(max_generalized_eigenvector(a, b, assume_b_pd=True))
    w = np.stack(cols, axis=1) * np.sqrt(p0 / k)
    return Precoder(w=w, label="ajp")


def normalize_power(pre: Precoder, p0: float) -> Precoder:
    """Scale all vectors by one common factor so the total power is P0."""
    total = pre.total_power()
    if total == 0.0:
        raise ValueError("cannot normalize an all-zero precoder")
    return Precoder(w=pre.w * np.sqrt(p0 / total), label=pre.label)
