"""Alternating rate control: precoder refresh, RIS phase descent and
Lagrange-multiplier ascent, minimizing the secondary-link rate subject to
the fronthaul sum-rate demand.

All loop-internal quantities are in bits/s/Hz; the returned report converts
to bits/s. Feasible iterates are post-processed by scaling the secondary
precoder down until the sum rate just meets the demand, so the reported
redundancy never exceeds what the demand actually requires.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelRealization
from .config import ControllerConfig, SystemParams
from .precoding import PrecoderPair, default_precoder_init, modified_wmmse, sum_rate_wmmse
from .rates import EffectiveChannels, RateReport, effective_channel, rate_bpshz
from .ris import PhaseVector, optimize_phases, random_phases

# Outer iterations without best-redundancy improvement before giving up.
DEFAULT_STALL_WINDOW = 15


class SolveStatus(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    r1_bpshz: float
    r2_bpshz: float
    lam: float
    lagrangian: float


@dataclass
class SolverState:
    precoders: PrecoderPair
    phases: PhaseVector
    lam: float
    trace: list[TraceRecord] = field(default_factory=list)


@dataclass(frozen=True)
class SolveOutcome:
    report: RateReport
    state: SolverState
    status: SolveStatus
    iterations: int


def lambda_update(
    lam: float, r1: float, r2: float, c0: float, alpha: float, lambda_max: float = 1e3
) -> float:
    """Dual ascent step with the floor at 1 and a saturation cap."""
    return min(max(lam + alpha * (c0 - r1 - r2), 1.0), lambda_max)


def serve_demand(
    eff: EffectiveChannels,
    w1: np.ndarray,
    w2: np.ndarray,
    c0: float,
    params: SystemParams,
    tol_rate: float,
) -> tuple[float, float]:
    """Operating rates when exactly the demand c0 is carried.

    The fronthaul transports at most c0, so a feasible design serves it by
    scaling precoders back instead of overshooting: first the secondary
    precoder is reduced (freeing primary rate through less interference),
    and if the primary link alone covers the demand its precoder is reduced
    too. Returns the served (r1, r2) in bits/s/Hz; an infeasible input is
    returned unscaled.
    """
    r1_full = rate_bpshz(1, eff, w1, w2, params)
    r2_full = rate_bpshz(2, eff, w1, w2, params)
    if r1_full + r2_full <= c0:
        return r1_full, r2_full
    band = c0 * (1.0 + 0.1 * tol_rate)
    zeros2 = np.zeros_like(w2)
    r1_alone = rate_bpshz(1, eff, w1, zeros2, params)
    if r1_alone >= c0:
        # Primary-only operation; back off W_1 until it carries just c0.
        lo, hi = 0.0, 1.0
        r1_hi = r1_alone
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            r1_mid = rate_bpshz(1, eff, mid * w1, zeros2, params)
            if r1_mid >= c0:
                hi, r1_hi = mid, r1_mid
                if r1_mid <= band:
                    break
            else:
                lo = mid
        return r1_hi, 0.0
    lo, hi = 0.0, 1.0
    r1_hi, r2_hi = r1_full, r2_full
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        w2_mid = mid * w2
        r1_mid = rate_bpshz(1, eff, w1, w2_mid, params)
        r2_mid = rate_bpshz(2, eff, w1, w2_mid, params)
        total = r1_mid + r2_mid
        if total >= c0:
            hi, r1_hi, r2_hi = mid, r1_mid, r2_mid
            if total <= band:
                break
        else:
            lo = mid
    return r1_hi, r2_hi


def _is_degenerate(eff: EffectiveChannels) -> bool:
    return not np.any(eff.h1) and not np.any(eff.h2)


def solve_realization(
    real: ChannelRealization,
    cfg: ControllerConfig,
    params: SystemParams,
    rng: np.random.Generator,
    optimize_ris: bool = True,
    keep_trace: bool = True,
    stall_window: int = DEFAULT_STALL_WINDOW,
) -> SolveOutcome:
    """Run the alternating rate-control loop on one channel realization.

    Returns the feasible iterate with the smallest trimmed secondary rate.
    The loop exits early on dual convergence, on a saturated multiplier with
    unmet demand, or when the best redundancy stops improving.
    """
    c0 = cfg.c0 / params.bandwidth_hz
    power = params.power_budget_w
    m_ris = real.h_t.shape[0]
    phi = random_phases(m_ris, rng)
    ris_active = optimize_ris and bool(np.any(real.h_t)) and (
        np.any(real.h_r1) or np.any(real.h_r2)
    )
    eff = effective_channel(real, phi)
    pair = default_precoder_init(eff, power)
    lam = 1.0

    if _is_degenerate(eff):
        state = SolverState(pair, PhaseVector(phi, cfg.eta), lam)
        return SolveOutcome(RateReport(0.0, 0.0, False), state, SolveStatus.INFEASIBLE, 0)

    best_r1 = best_r2 = None
    best_pair, best_phi = pair, phi
    stable = 0
    stall = 0
    last_r1, last_r2 = 0.0, 0.0
    trace: list[TraceRecord] = []
    iterations = 0

    for t in range(1, cfg.max_outer + 1):
        iterations = t
        pair = modified_wmmse(
            eff, lam, power, params, w_init=pair, inner_iters=cfg.inner_wmmse_iters
        )
        if ris_active:
            pv = optimize_phases(
                real, pair.w1, pair.w2, lam, params, cfg.max_phase_steps, cfg.eta, phi
            )
            phi = pv.phi
            eff = effective_channel(real, phi)
        r1 = rate_bpshz(1, eff, pair.w1, pair.w2, params)
        r2 = rate_bpshz(2, eff, pair.w1, pair.w2, params)
        total = r1 + r2
        lagr = r2 + lam * (c0 - total)

        improved = False
        served_r1, served_r2 = r1, r2
        if total >= c0 * (1.0 - cfg.tol_rate):
            served_r1, served_r2 = serve_demand(
                eff, pair.w1, pair.w2, c0, params, cfg.tol_rate
            )
            if best_r2 is None or served_r2 < best_r2 - cfg.tol_rate * c0:
                improved = True
            if best_r2 is None or served_r2 < best_r2:
                best_r1, best_r2 = served_r1, served_r2
                best_pair, best_phi = pair, phi
        stall = 0 if improved else stall + 1
        # The trace carries the served operating rates; the dual update
        # below stays on the raw maximized rates.
        if keep_trace:
            trace.append(TraceRecord(t, served_r1, served_r2, lam, lagr))
        last_r1, last_r2 = served_r1, served_r2

        new_lam = lambda_update(lam, r1, r2, c0, cfg.alpha, cfg.lambda_max)
        at_demand = abs(total - c0) <= cfg.tol_rate * c0
        surplus_at_floor = lam == 1.0 and new_lam == 1.0 and total >= c0
        lam_stable = abs(new_lam - lam) <= 1e-6 * max(new_lam, 1.0)
        if (at_demand or surplus_at_floor) and lam_stable:
            stable += 1
        else:
            stable = 0
        lam = new_lam
        if stable >= 5:
            break
        if best_r2 is not None and stall >= stall_window:
            break
        if best_r2 is None and lam >= cfg.lambda_max:
            break

    state = SolverState(best_pair, PhaseVector(best_phi, cfg.eta), lam, trace)
    b = params.bandwidth_hz
    if best_r2 is not None:
        report = RateReport(best_r1 * b, best_r2 * b, True)
        return SolveOutcome(report, state, SolveStatus.FEASIBLE, iterations)
    report = RateReport(last_r1 * b, last_r2 * b, False)
    status = SolveStatus.INFEASIBLE if lam >= cfg.lambda_max else SolveStatus.MAX_ITERATIONS
    return SolveOutcome(report, state, status, iterations)


def solve_no_ris(
    real: ChannelRealization,
    cfg: ControllerConfig,
    params: SystemParams,
    rng: np.random.Generator,
    keep_trace: bool = True,
) -> SolveOutcome:
    """Baseline without the reflecting surface: cascade zeroed, no phase loop."""
    bare = replace(
        real,
        h_t=np.zeros_like(real.h_t),
        h_r1=np.zeros_like(real.h_r1),
        h_r2=np.zeros_like(real.h_r2),
    )
    return solve_realization(bare, cfg, params, rng, optimize_ris=False, keep_trace=keep_trace)


def solve_max_sum_rate(
    real: ChannelRealization,
    cfg: ControllerConfig,
    params: SystemParams,
    rng: np.random.Generator,
    optimize_ris: bool = True,
) -> SolveOutcome:
    """Conventional sum-rate maximization run, used as the comparison
    baseline showing how much secondary rate the rate controller saves."""
    power = params.power_budget_w
    phi = random_phases(real.h_t.shape[0], rng)
    ris_active = optimize_ris and bool(np.any(real.h_t)) and (
        np.any(real.h_r1) or np.any(real.h_r2)
    )
    eff = effective_channel(real, phi)
    pair = default_precoder_init(eff, power)
    c0 = cfg.c0 / params.bandwidth_hz
    trace: list[TraceRecord] = []
    prev_total = -np.inf
    iterations = 0
    for t in range(1, cfg.max_outer + 1):
        iterations = t
        pair = sum_rate_wmmse(eff, power, params, w_init=pair, inner_iters=cfg.inner_wmmse_iters)
        if ris_active:
            pv = optimize_phases(
                real, pair.w1, pair.w2, 0.0, params, cfg.max_phase_steps, cfg.eta, phi,
                maximize_sum=True,
            )
            phi = pv.phi
            eff = effective_channel(real, phi)
        r1 = rate_bpshz(1, eff, pair.w1, pair.w2, params)
        r2 = rate_bpshz(2, eff, pair.w1, pair.w2, params)
        total = r1 + r2
        trace.append(TraceRecord(t, r1, r2, 1.0, total))
        if total - prev_total <= 1e-6 * max(total, 1.0):
            break
        prev_total = total
    state = SolverState(pair, PhaseVector(phi, cfg.eta), 1.0, trace)
    b = params.bandwidth_hz
    feasible = trace[-1].r1_bpshz + trace[-1].r2_bpshz >= c0 * (1.0 - cfg.tol_rate)
    report = RateReport(trace[-1].r1_bpshz * b, trace[-1].r2_bpshz * b, feasible)
    return SolveOutcome(report, state, SolveStatus.FEASIBLE if feasible else SolveStatus.MAX_ITERATIONS, iterations)
