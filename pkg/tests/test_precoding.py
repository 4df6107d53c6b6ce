"""Tests for the ZF precoder and the generalized-eigenvector anti-jammer."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discosim.channel import complex_normal
from discosim.errors import SingularMatrixError
from discosim.precoding import (
    ChannelEstimate,
    DeltaEstimates,
    Precoder,
    ajp_precoder,
    max_generalized_eigenvector,
    normalize_power,
    zf_precoder,
)
from discosim.scenario import derive_stream


def rayleigh_quotient(a, b, v):
    return float(np.real(np.conj(v) @ a @ v) / np.real(np.conj(v) @ b @ v))


def random_hermitian_pair(n, stream):
    """Well-conditioned Hermitian PSD / PD pair."""
    x = complex_normal(stream, (n, n))
    y = complex_normal(stream, (n, n))
    a = x @ np.conj(x).T
    b = y @ np.conj(y).T + 0.5 * np.eye(n)
    return a, b


def whitening_oracle(a, b):
    """Independent route: Cholesky-whiten B and solve a standard eigenproblem."""
    L = np.linalg.cholesky(b)
    Linv = np.linalg.inv(L)
    c = Linv @ a @ np.conj(Linv).T
    c = 0.5 * (c + np.conj(c).T)
    vals, vecs = np.linalg.eigh(c)
    w = np.conj(Linv).T @ vecs[:, -1]
    return w / np.linalg.norm(w)


def align_phase(v, ref):
    inner = np.vdot(ref, v)
    return v * np.exp(-1j * np.angle(inner)) if inner != 0 else v


class TestZf:
    def test_identity_channel(self):
        est = ChannelEstimate(h_pt=np.eye(2, dtype=complex))
        pre = zf_precoder(est, p0=4.0)
        assert np.allclose(np.abs(pre.w), np.sqrt(2.0) * np.eye(2), atol=1e-12)
        assert np.linalg.norm(pre.w[:, 0]) ** 2 == pytest.approx(2.0, rel=1e-12)

    def test_single_user_matched_direction(self):
        h = complex_normal(derive_stream(4, 0, "h"), (1, 6))
        pre = zf_precoder(ChannelEstimate(h_pt=h), p0=1.0)
        w = pre.w[:, 0]
        # collinear with the channel vector
        corr = abs(np.vdot(h[0], w)) / (np.linalg.norm(h) * np.linalg.norm(w))
        assert corr == pytest.approx(1.0, rel=1e-12)

    def test_orthogonality_random_instance(self):
        # pseudo-inverse oracle: residual projections at numerical noise
        h = complex_normal(derive_stream(4, 1, "h"), (12, 16))
        pre = zf_precoder(ChannelEstimate(h_pt=h), p0=2.0)
        g = np.conj(h) @ pre.w
        off = g - np.diag(np.diag(g))
        scale = max(
            np.linalg.norm(h[k]) * np.linalg.norm(pre.w[:, k]) for k in range(12)
        )
        assert np.max(np.abs(off)) < 1e-9 * scale
        assert pre.total_power() == pytest.approx(2.0, rel=1e-9)

    def test_rank_deficient_reports_cond(self):
        h = complex_normal(derive_stream(4, 2, "h"), (3, 8))
        h[2] = h[0]  # duplicated user direction
        with pytest.raises(SingularMatrixError) as err:
            zf_precoder(ChannelEstimate(h_pt=h), p0=1.0)
        assert err.value.cond > 1e12


class TestMaxGeneralizedEigenvector:
    def test_diagonal_case(self):
        v = max_generalized_eigenvector(np.diag([4.0, 1.0]).astype(complex), np.eye(2, dtype=complex))
        assert np.allclose(v, [1.0, 0.0], atol=1e-12)

    def test_isotropic_tie_is_deterministic(self):
        a = np.eye(3, dtype=complex)
        v1 = max_generalized_eigenvector(a, a.copy())
        v2 = max_generalized_eigenvector(a, a.copy())
        assert np.array_equal(v1, v2)
        assert np.linalg.norm(v1) == pytest.approx(1.0, rel=1e-12)
        assert rayleigh_quotient(a, a, v1) == pytest.approx(1.0, rel=1e-12)

    def test_matches_whitening_oracle_and_beats_random(self):
        stream = derive_stream(4, 3, "pairs")
        probe = complex_normal(stream, (8, 10_000))
        probe /= np.linalg.norm(probe, axis=0, keepdims=True)
        for _ in range(20):
            a, b = random_hermitian_pair(8, stream)
            v = max_generalized_eigenvector(a, b)
            ref = whitening_oracle(a, b)
            assert np.linalg.norm(align_phase(v, ref) - ref) < 1e-8
            q = rayleigh_quotient(a, b, v)
            nums = np.real(np.sum(np.conj(probe) * (a @ probe), axis=0))
            dens = np.real(np.sum(np.conj(probe) * (b @ probe), axis=0))
            assert q >= np.max(nums / dens) * (1.0 - 1e-12)

    def test_singular_b_rejected(self):
        a = np.eye(4, dtype=complex)
        b = np.zeros((4, 4), dtype=complex)
        b[0, 0] = 1.0
        with pytest.raises(SingularMatrixError):
            max_generalized_eigenvector(a, b)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            max_generalized_eigenvector(np.eye(3), np.eye(4))

    def test_scale_invariance(self):
        # multiplying A and B by positive scalars leaves the direction alone
        stream = derive_stream(4, 4, "pairs")
        a, b = random_hermitian_pair(6, stream)
        v = max_generalized_eigenvector(a, b)
        for sa, sb in [(3.7, 1.0), (1.0, 0.02), (250.0, 0.5)]:
            u = max_generalized_eigenvector(sa * a, sb * b)
            assert abs(np.vdot(u, v)) == pytest.approx(1.0, rel=1e-9)

    def test_monotone_isotropy(self):
        # As the numerator becomes isotropic the relative quotient advantage
        # of the argmax over the canonical tie-break vector shrinks.
        h = complex_normal(derive_stream(4, 5, "h"), (6,))
        eye = np.eye(6, dtype=complex)
        canonical = max_generalized_eigenvector(eye, eye)
        gaps = []
        for delta in np.logspace(-2.0, 4.0, 13):
            a = np.outer(h, np.conj(h)) + delta * eye
            v = max_generalized_eigenvector(a, eye)
            q_best = rayleigh_quotient(a, eye, v)
            q_canon = rayleigh_quotient(a, eye, canonical)
            gaps.append((q_best - q_canon) / q_best)
        assert all(g2 <= g1 + 1e-12 for g1, g2 in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-3


class TestAjp:
    def test_single_user_matched(self):
        h = complex_normal(derive_stream(4, 6, "h"), (1, 5))
        pre = ajp_precoder(
            ChannelEstimate(h_pt=h), DeltaEstimates.zeros(1), noise_var=1e-3, p0=1.0
        )
        corr = abs(np.vdot(h[0], pre.w[:, 0]))
        corr /= np.linalg.norm(h) * np.linalg.norm(pre.w[:, 0])
        assert corr == pytest.approx(1.0, rel=1e-10)

    def test_zero_delta_matches_slnr_closed_form(self):
        # independent oracle: with a rank-one numerator the SLNR maximizer is
        # w proportional to (co co^H + loading I)^{-1} h.
        k, n_ap, p0, noise = 4, 8, 2.0, 1e-2
        h = complex_normal(derive_stream(4, 7, "h"), (k, n_ap))
        est = ChannelEstimate(h_pt=h)
        pre = ajp_precoder(est, DeltaEstimates.zeros(k), noise_var=noise, p0=p0)
        for i in range(k):
            co = est.co_channels(i)
            b = co @ np.conj(co).T + (noise * k / p0) * np.eye(n_ap)
            ref = np.linalg.solve(b, h[i])
            ref /= np.linalg.norm(ref)
            got = pre.w[:, i] / np.linalg.norm(pre.w[:, i])
            assert abs(np.vdot(ref, got)) == pytest.approx(1.0, abs=1e-8)

    def test_beats_zf_quotient_under_jamming(self):
        # direct quotient comparison on each user's statistical objective
        k, n_ap, p0, noise = 4, 8, 1.0, 1e-2
        h = complex_normal(derive_stream(4, 8, "h"), (k, n_ap))
        est = ChannelEstimate(h_pt=h)
        deltas = DeltaEstimates(delta_sq=np.array([0.05, 0.3, 0.01, 0.6]))
        ajp = ajp_precoder(est, deltas, noise_var=noise, p0=p0)
        zf = zf_precoder(est, p0)
        total = float(np.sum(deltas.delta_sq))
        for i in range(k):
            a = np.outer(h[i], np.conj(h[i])) + deltas.delta_sq[i] * np.eye(n_ap)
            co = est.co_channels(i)
            loading = noise * k / p0 + total - deltas.delta_sq[i]
            b = co @ np.conj(co).T + loading * np.eye(n_ap)
            q_ajp = rayleigh_quotient(a, b, ajp.w[:, i] / np.linalg.norm(ajp.w[:, i]))
            q_zf = rayleigh_quotient(a, b, zf.w[:, i] / np.linalg.norm(zf.w[:, i]))
            assert q_ajp >= q_zf * (1.0 - 1e-12)

    def test_total_power(self):
        h = complex_normal(derive_stream(4, 9, "h"), (3, 6))
        pre = ajp_precoder(
            ChannelEstimate(h_pt=h),
            DeltaEstimates(delta_sq=np.array([0.1, 0.0, 0.2])),
            noise_var=1e-3,
            p0=5.0,
        )
        assert pre.total_power() == pytest.approx(5.0, rel=1e-9)

    def test_negative_delta_rejected(self):
        with pytest.raises(ValueError):
            DeltaEstimates(delta_sq=np.array([-0.1]))

    def test_common_factor_invariance(self):
        # scaling deltas and noise by lambda and the channels by sqrt(lambda)
        # scales both regularizers by lambda and leaves directions unchanged
        k, n_ap, p0, noise = 3, 6, 2.0, 1e-3
        h = complex_normal(derive_stream(4, 11, "h"), (k, n_ap))
        deltas = DeltaEstimates(delta_sq=np.array([0.02, 0.5, 0.1]))
        base = ajp_precoder(ChannelEstimate(h_pt=h), deltas, noise, p0)
        for lam in (0.125, 9.0):
            scaled = ajp_precoder(
                ChannelEstimate(h_pt=np.sqrt(lam) * h),
                DeltaEstimates(delta_sq=lam * deltas.delta_sq),
                noise_var=lam * noise,
                p0=p0,
            )
            for i in range(k):
                u = base.w[:, i] / np.linalg.norm(base.w[:, i])
                v = scaled.w[:, i] / np.linalg.norm(scaled.w[:, i])
                assert abs(np.vdot(u, v)) == pytest.approx(1.0, rel=1e-9)


class TestNormalizePower:
    def test_idempotent(self):
        w = complex_normal(derive_stream(4, 10, "w"), (6, 3))
        pre = normalize_power(Precoder(w=w), p0=2.0)
        again = normalize_power(pre, p0=2.0)
        assert np.allclose(pre.w, again.w, rtol=1e-12)

    def test_common_factor(self):
        w = np.eye(4, dtype=complex) * 2.0  # total power 16 = 4 * P0 for P0=4
        pre = normalize_power(Precoder(w=w), p0=4.0)
        assert np.allclose(pre.w, np.eye(4) * 1.0, rtol=1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_total_power_and_directions(self, seed):
        w = complex_normal(derive_stream(seed, 0, "w"), (5, 4))
        pre = normalize_power(Precoder(w=w), p0=3.0)
        assert pre.total_power() == pytest.approx(3.0, rel=1e-12)
        for i in range(4):
            corr = abs(np.vdot(w[:, i], pre.w[:, i]))
            corr /= np.linalg.norm(w[:, i]) * np.linalg.norm(pre.w[:, i])
            assert corr == pytest.approx(1.0, rel=1e-12)

    def test_zero_precoder_rejected(self):
        with pytest.raises(ValueError):
            normalize_power(Precoder(w=np.zeros((4, 2), dtype=complex)), p0=1.0)
