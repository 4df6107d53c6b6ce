"""Per-trial simulation engine and Monte Carlo rate aggregation.

One trial = one coherence interval: drop users, draw fading, build the
reflect-state schedule, train during the pilot phase, pick the benchmark's
precoder, then score every data slot with the instantaneous composite
channel. Rates are Shannon per-slot rates log2(1 + SJNR) averaged over the
data phase. Aging-induced inter-user interference is computed exactly from
the instantaneous channels; the Gaussian perturbation model is used only
inside the anti-jamming precoder and its variance estimator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channel as ch
from . import dirs as di
from . import estimation as es
from . import precoding as pc
from . import scenario as sc
from .errors import ConfigError

BENCHMARK_TAGS = ("no_jamming_zf", "fpj_zf", "fpj_ajp", "aj_zf")


class TrialError(RuntimeError):
    """A component failure inside one trial, with the trial index attached."""


@dataclass(frozen=True)
class Benchmark:
    """One simulated system variant.

    ``dirs_mode`` / ``phase_dist`` override the scenario values when set;
    ``delta_oracle`` makes the anti-jamming precoder use the analytic
    perturbation variance instead of power-feedback estimates.
    """

    tag: str
    label: str
    dirs_mode: str | None = None
    phase_dist: di.PhaseDistribution | None = None
    delta_oracle: bool = False

    def __post_init__(self):
        if self.tag not in BENCHMARK_TAGS:
            raise ConfigError(f"unknown benchmark tag '{self.tag}'")


def _registry() -> dict[str, Benchmark]:
    c1, c2 = di.case_one(), di.case_two()
    entries = [
        Benchmark(tag="no_jamming_zf", label="no_jamming_zf", dirs_mode="off"),
        Benchmark(tag="aj_zf", label="aj_zf", dirs_mode="off"),
        Benchmark(tag="fpj_zf", label="fpj_zf"),
        Benchmark(tag="fpj_ajp", label="fpj_ajp"),
        Benchmark(tag="fpj_zf", label="fpj_zf_case1", phase_dist=c1),
        Benchmark(tag="fpj_zf", label="fpj_zf_case2", phase_dist=c2),
        Benchmark(tag="fpj_ajp", label="fpj_ajp_case1", phase_dist=c1),
        Benchmark(tag="fpj_ajp", label="fpj_ajp_case2", phase_dist=c2),
        Benchmark(tag="fpj_ajp", label="fpj_ajp_oracle", delta_oracle=True),
        Benchmark(tag="fpj_ajp", label="fpj_ajp_oracle_case1", phase_dist=c1, delta_oracle=True),
        Benchmark(tag="fpj_ajp", label="fpj_ajp_oracle_case2", phase_dist=c2, delta_oracle=True),
    ]
    return {b.label: b for b in entries}


BENCHMARKS = _registry()


def benchmark(name: str) -> Benchmark:
    """Look up a benchmark by label (e.g. ``fpj_zf_case1``)."""
    try:
        return BENCHMARKS[name]
    except KeyError:
        raise ConfigError(
            f"unknown benchmark '{name}'; known: {sorted(BENCHMARKS)}"
        ) from None


@dataclass(frozen=True)
class TrialResult:
    """Per-user data-phase rates of one trial, optionally with traces."""

    per_lu_rate: np.ndarray                       # (K,), bit/s/Hz
    per_lu_sjnr_trace: np.ndarray | None = None   # (Q, K) per data block
    feedback_trace: tuple | None = None           # (round, user, p_watts, delta_hat)


@dataclass(frozen=True)
class RateSummary:
    """Monte Carlo mean rate per user with a trial-level 95% interval."""

    mean_rate: float
    ci95_halfwidth: float
    n_trials: int
    trial_means: np.ndarray     # (n_trials,)
    trial_lu_rates: np.ndarray  # (n_trials, K)


def sjnr(
    h_true: ch.CompositeChannel | np.ndarray,
    pre: pc.Precoder,
    k: int,
    noise_var: float,
    aj_term: float = 0.0,
) -> float:
    """Instantaneous SJNR of user k: |h^H w_k|^2 over interference plus noise."""
    if noise_var <= 0.0:
        raise ValueError("noise_var must be positive")
    h = h_true.h if isinstance(h_true, ch.CompositeChannel) else np.asarray(h_true)
    g = np.conj(h) @ pre.w  # (K,)
    sig = np.abs(g[k]) ** 2
    iui = float(np.sum(np.abs(g) ** 2) - sig)
    return float(sig / (max(iui, 0.0) + aj_term + noise_var))


def _sjnr_all(h_matrix: np.ndarray, pre: pc.Precoder, noise_var: float, aj_terms: np.ndarray) -> np.ndarray:
    """Vectorized per-user SJNRs for stacked composite channels (K, n_ap)."""
    g = np.conj(h_matrix) @ pre.w   # (K, K): [k, u] = h_k^H w_u
    sig = np.abs(np.diag(g)) ** 2
    iui = np.maximum(np.sum(np.abs(g) ** 2, axis=1) - sig, 0.0)
    return sig / (iui + aj_terms + noise_var)


def aj_interference(g_k: complex, p_j: float) -> float:
    """Received interference power from a constant single-antenna active jammer."""
    if p_j < 0.0:
        raise ValueError("jammer power must be non-negative")
    return float(np.abs(g_k) ** 2 * p_j)


def _resolve(cfg: sc.ScenarioConfig, bench: Benchmark) -> tuple[str, di.PhaseDistribution]:
    # fpj benchmarks normally run in a jamming mode but inherit the scenario's
    # mode, so dirs_mode="off" deliberately degenerates them to the clean
    # pipeline (used to verify off-mode equivalence with no_jamming_zf).
    mode = bench.dirs_mode if bench.dirs_mode is not None else cfg.dirs_mode
    dist = bench.phase_dist if bench.phase_dist is not None else cfg.phase_dist
    if bench.tag == "aj_zf" and cfg.aj_power_dbm is None:
        raise ConfigError("benchmark 'aj_zf' requires aj_power_dbm in the scenario")
    return mode, dist


def _oracle_deltas(cfg, cs: ch.ChannelSet, mode: str, dist: di.PhaseDistribution) -> pc.DeltaEstimates:
    g_ad = ch.LinkGain(cs.ap_dirs_gain)
    var = np.array(
        [
            ch.aging_variance(mode, g_ad, ch.LinkGain(g), dist, cfg.n_dirs_elements)
            for g in cs.dirs_lu_gains
        ]
    )
    return pc.DeltaEstimates(delta_sq=var)


def _ajp_from_feedback(
    cfg: sc.ScenarioConfig,
    h_pt_true: np.ndarray,
    dt_mats: np.ndarray,
    est: pc.ChannelEstimate,
    w_zf: pc.Precoder,
    trial: int,
    collect_trace: bool,
):
    """Run the detection + feedback frame and return the final precoder.

    Round s measures received power over data block s-1 under the precoder
    active after round s-1 (starting from ZF) and refines the running-mean
    variance estimate. Users whose own SJNR did not degrade beyond the
    threshold stay silent and keep delta = 0; if nobody detects the jamming
    the access point keeps the plain ZF precoder.
    """
    noise = cfg.noise_power_w
    p0 = cfg.total_power_w
    zeros = np.zeros(cfg.n_users)

    sjnr_pt = _sjnr_all(h_pt_true, w_zf, noise, zeros)
    sjnr_dt0 = _sjnr_all(dt_mats[0], w_zf, noise, zeros)
    detected = np.array(
        [
            es.detect_jamming(p, d, cfg.detection_threshold_db)
            for p, d in zip(sjnr_pt, sjnr_dt0)
        ]
    )
    if not detected.any():
        return w_zf, None

    trace = [] if collect_trace else None
    deltas: pc.DeltaEstimates | None = None
    pre = w_zf
    for s in range(1, cfg.frame.m_feedbacks + 1):
        h_s = dt_mats[min(s - 1, len(dt_mats) - 1)]
        fb = es.measure_received_power(
            h_s,
            pre,
            noise,
            sc.derive_stream(cfg.master_seed, trial, f"power_meas_{s}"),
            cfg.n_power_symbols,
            round_index=s,
        )
        deltas = es.estimate_delta(fb, est, pre, noise, p0, prior=deltas)
        deltas = pc.DeltaEstimates(delta_sq=np.where(detected, deltas.delta_sq, 0.0))
        pre = pc.ajp_precoder(est, deltas, noise, p0)
        if trace is not None:
            trace.extend(
                (s, u, float(fb.p[u]), float(deltas.delta_sq[u]))
                for u in range(cfg.n_users)
            )
    return pre, tuple(trace) if trace is not None else None


def run_trial(
    cfg: sc.ScenarioConfig, bench: Benchmark, trial: int, collect_trace: bool = False
) -> TrialResult:
    """Simulate one coherence interval under one benchmark."""
    mode, dist = _resolve(cfg, bench)
    try:
        return _run_trial(cfg, bench, mode, dist, trial, collect_trace)
    except Exception as exc:
        raise TrialError(f"trial {trial}, benchmark '{bench.label}': {exc}") from exc


def _run_trial(cfg, bench, mode, dist, trial, collect_trace) -> TrialResult:
    seed = cfg.master_seed
    noise = cfg.noise_power_w
    p0 = cfg.total_power_w

    users = sc.place_users(cfg, sc.derive_stream(seed, trial, "user_drop"))
    cs = ch.draw_channel_set(cfg, users, trial, with_cascade=mode != "off")
    sched = di.build_schedule(
        cfg, sc.derive_stream(seed, trial, "dirs_schedule"), mode=mode, dist=dist
    )

    h_pt_true = ch.composite_matrix(cs, sched.pt_state)
    dt_mats = ch.composite_batch(cs, sched.dt_states)
    if cfg.csi_mode == "perfect":
        est = pc.ChannelEstimate(h_pt=h_pt_true)
    else:
        pilots = es.make_pilot_matrix(cfg.n_users, cfg.frame.t_p_slots, p0)
        pb = es.transmit_pilots(
            h_pt_true, pilots, noise, sc.derive_stream(seed, trial, "pilot_noise")
        )
        est = es.ls_estimate(pb)

    w_zf = pc.zf_precoder(est, p0)

    if bench.tag == "aj_zf":
        aj_terms = np.array([aj_interference(g, cfg.aj_power_w) for g in cs.g_aj_lu])
    else:
        aj_terms = np.zeros(cfg.n_users)

    feedback_trace = None
    if bench.tag == "fpj_ajp":
        if bench.delta_oracle:
            pre = pc.ajp_precoder(est, _oracle_deltas(cfg, cs, mode, dist), noise, p0)
        else:
            pre, feedback_trace = _ajp_from_feedback(
                cfg, h_pt_true, dt_mats, est, w_zf, trial, collect_trace
            )
    else:
        pre = w_zf

    lengths = sched.block_lengths()
    rates = np.zeros(cfg.n_users)
    sjnr_trace = [] if collect_trace else None
    for h_q, length in zip(dt_mats, lengths):
        if length == 0:
            continue
        s = _sjnr_all(h_q, pre, noise, aj_terms)
        rates += length * np.log2(1.0 + s)
        if sjnr_trace is not None:
            sjnr_trace.append(s)
    rates /= cfg.frame.t_d_slots

    return TrialResult(
        per_lu_rate=rates,
        per_lu_sjnr_trace=np.array(sjnr_trace) if sjnr_trace else None,
        feedback_trace=feedback_trace,
    )


def ergodic_rates(
    cfg: sc.ScenarioConfig, bench: Benchmark, trace_sink=None
) -> RateSummary:
    """Mean per-user rate over ``cfg.n_trials`` trials with a 95% interval.

    Deterministic for a fixed master seed: trials accumulate in index order,
    so the result does not depend on how the work would be scheduled.
    """
    if cfg.n_trials < 2:
        raise ConfigError("n_trials must be >= 2 to form a confidence interval")
    lu_rates = np.empty((cfg.n_trials, cfg.n_users))
    for t in range(cfg.n_trials):
        res = run_trial(cfg, bench, t, collect_trace=trace_sink is not None)
        lu_rates[t] = res.per_lu_rate
        if trace_sink is not None:
            trace_sink(t, res)
    trial_means = lu_rates.mean(axis=1)
    mean = float(trial_means.mean())
    ci = 1.96 * float(trial_means.std(ddof=1)) / np.sqrt(cfg.n_trials)
    return RateSummary(
        mean_rate=mean,
        ci95_halfwidth=float(ci),
        n_trials=cfg.n_trials,
        trial_means=trial_means,
        trial_lu_rates=lu_rates,
    )
