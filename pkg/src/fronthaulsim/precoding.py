"""Precoder selection: water-filling branch and the multiplier-weighted
MMSE update with bisected power control.

For multiplier values at or below 1 the weighted problem degenerates to
maximizing the primary-link rate alone, which water-filling solves exactly.
Above 1 the update alternates MMSE equalizers, scaled weight matrices and
the closed-form precoder, with the power constraint enforced through a
monotone bisection on the regularization term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemParams
from .rates import EffectiveChannels, _hermitize, mmse_equalizer, mse_matrix

DEFAULT_POWER_TOL = 1e-6
_MAX_DOUBLINGS = 60


class PrecodingError(RuntimeError):
    pass


class SingularGramError(PrecodingError):
    """Raised when the unregularized Gram matrix cannot be inverted; callers
    should re-enter through the bisection with a positive regularizer."""


@dataclass(frozen=True)
class PrecoderPair:
    w1: np.ndarray
    w2: np.ndarray
    mu: float = 0.0

    @property
    def total_power(self) -> float:
        return float(np.sum(np.abs(self.w1) ** 2) + np.sum(np.abs(self.w2) ** 2))


@dataclass(frozen=True)
class MseWeights:
    v1: np.ndarray
    v2: np.ndarray


def total_power(w1: np.ndarray, w2: np.ndarray) -> float:
    return float(np.sum(np.abs(w1) ** 2) + np.sum(np.abs(w2) ** 2))


def waterfill_powers(gains: np.ndarray, budget: float) -> np.ndarray:
    """Classic water-filling over parallel channels with linear SNR gains."""
    gains = np.asarray(gains, dtype=float)
    powers = np.zeros_like(gains)
    active = np.flatnonzero(gains > 0)
    if active.size == 0 or budget <= 0:
        return powers
    # Descending gains, stable order for determinism.
    order = active[np.argsort(-gains[active], kind="stable")]
    g = gains[order]
    for k in range(g.size, 0, -1):
        level = (budget + np.sum(1.0 / g[:k])) / k
        p = level - 1.0 / g[:k]
        if p[-1] >= 0:
            powers[order[:k]] = p
            break
    return powers


def waterfilling(h1: np.ndarray, power: float, params: SystemParams) -> PrecoderPair:
    """Maximize the primary-link rate with the secondary precoder zeroed."""
    n_tx = h1.shape[1]
    w2 = np.zeros((n_tx, n_tx), dtype=complex)
    if not np.any(h1):
        return PrecoderPair(np.zeros((n_tx, n_tx), dtype=complex), w2, 0.0)
    _, sing, vh = np.linalg.svd(h1, full_matrices=False)
    gains = sing**2 / params.noise_power_w
    powers = waterfill_powers(gains, power)
    w1 = np.zeros((n_tx, n_tx), dtype=complex)
    w1[:, : sing.size] = vh.conj().T * np.sqrt(powers)
    return PrecoderPair(w1, w2, 0.0)


def wmmse_weights(lam: float, e1: np.ndarray, e2: np.ndarray) -> MseWeights:
    """Multiplier-scaled MSE weights V_1 = lam E_1^-1, V_2 = (lam-1) E_2^-1."""
    if lam < 1:
        raise PrecodingError(
            f"weighted branch requires lambda >= 1, got {lam}; use waterfilling"
        )
    v1 = lam * _hermitize(np.linalg.inv(e1))
    v2 = (lam - 1.0) * _hermitize(np.linalg.inv(e2))
    return MseWeights(v1, v2)


def conventional_weights(e1: np.ndarray, e2: np.ndarray) -> MseWeights:
    """Plain sum-rate WMMSE weights V_k = E_k^-1 (no multiplier scaling)."""
    return MseWeights(_hermitize(np.linalg.inv(e1)), _hermitize(np.linalg.inv(e2)))


def _gram_and_rhs(
    eff: EffectiveChannels,
    weights: MseWeights,
    equalizers: tuple[np.ndarray, np.ndarray],
) -> tuple[np.ndarray, list[np.ndarray]]:
    u1, u2 = equalizers
    gram = np.zeros((eff.h1.shape[1], eff.h1.shape[1]), dtype=complex)
    rhs = []
    for h, u, v in ((eff.h1, u1, weights.v1), (eff.h2, u2, weights.v2)):
        uh = u @ h
        gram += uh.conj().T @ v @ uh
        rhs.append(h.conj().T @ u.conj().T @ v)
    return _hermitize(gram), rhs


def precoder_update(
    eff: EffectiveChannels,
    weights: MseWeights,
    equalizers: tuple[np.ndarray, np.ndarray],
    mu: float,
    params: SystemParams,
) -> PrecoderPair:
    """Closed-form W_k = (sum_i H_i^H U_i^H V_i U_i H_i + mu I)^-1 H_k^H U_k^H V_k."""
    gram, rhs = _gram_and_rhs(eff, weights, equalizers)
    n = gram.shape[0]
    if not np.any(rhs[0]) and not np.any(rhs[1]):
        return PrecoderPair(np.zeros_like(gram), np.zeros_like(gram), mu)
    a = gram + mu * np.eye(n)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise SingularGramError(
            "Gram matrix is singular at mu=0; run the bisection with mu > 0"
        )
    w1 = np.linalg.solve(chol.conj().T, np.linalg.solve(chol, rhs[0]))
    w2 = np.linalg.solve(chol.conj().T, np.linalg.solve(chol, rhs[1]))
    return PrecoderPair(w1, w2, mu)


def bisect_mu(
    eff: EffectiveChannels,
    weights: MseWeights,
    equalizers: tuple[np.ndarray, np.ndarray],
    power: float,
    params: SystemParams,
    tol_p: float = DEFAULT_POWER_TOL,
) -> PrecoderPair:
    """Find the smallest regularizer meeting the transmit power budget.

    Transmit power is monotone nonincreasing in mu, so a doubling bracket
    followed by bisection suffices. mu = 0 is returned directly whenever it
    is already feasible (complementary slackness).
    """
    gram, rhs = _gram_and_rhs(eff, weights, equalizers)
    n = gram.shape[0]
    if not np.any(rhs[0]) and not np.any(rhs[1]):
        return PrecoderPair(np.zeros_like(gram), np.zeros_like(gram), 0.0)
    eigval, eigvec = np.linalg.eigh(gram)
    eigval = np.maximum(eigval, 0.0)
    c1 = eigvec.conj().T @ rhs[0]
    c2 = eigvec.conj().T @ rhs[1]
    row_sq = np.sum(np.abs(c1) ** 2, axis=1) + np.sum(np.abs(c2) ** 2, axis=1)

    def power_at(mu: float) -> float:
        denom = eigval + mu
        if np.any(denom <= 0):
            nz = denom <= 0
            if np.any(row_sq[nz] > 0):
                return np.inf
            denom = np.where(nz, 1.0, denom)
            return float(np.sum(row_sq * ~nz / denom**2))
        return float(np.sum(row_sq / denom**2))

    def build(mu: float) -> PrecoderPair:
        denom = eigval + mu
        safe = np.where(denom > 0, denom, 1.0)
        w1 = eigvec @ (c1 / safe[:, None])
        w2 = eigvec @ (c2 / safe[:, None])
        return PrecoderPair(w1, w2, mu)

    if power_at(0.0) <= power:
        return build(0.0)
    # Bracket: start at the Gram's mean eigenvalue scale and double.
    hi = max(float(np.mean(eigval)), 1e-300)
    for _ in range(_MAX_DOUBLINGS):
        if power_at(hi) <= power:
            break
        hi *= 2.0
    else:
        raise PrecodingError(
            "power bracket not found; MSE weights are degenerate"
        )
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        p_mid = power_at(mid)
        if abs(p_mid - power) <= tol_p * power:
            return build(mid)
        if p_mid > power:
            lo = mid
        else:
            hi = mid
    return build(hi)


def modified_wmmse(
    eff: EffectiveChannels,
    lam: float,
    power: float,
    params: SystemParams,
    w_init: PrecoderPair | None = None,
    inner_iters: int = 1,
    tol_p: float = DEFAULT_POWER_TOL,
) -> PrecoderPair:
    """One precoder refresh of the rate-control loop.

    lam <= 1 routes to water-filling on the primary effective channel; the
    weighted branch performs `inner_iters` equalizer/weight/precoder passes
    starting from `w_init`.
    """
    if lam <= 1:
        return waterfilling(eff.h1, power, params)
    if w_init is None:
        w_init = default_precoder_init(eff, power)
    pair = _revive_zero_blocks(eff, w_init, power)
    for _ in range(inner_iters):
        u1 = mmse_equalizer(1, eff, pair.w1, pair.w2, params)
        u2 = mmse_equalizer(2, eff, pair.w1, pair.w2, params)
        e1 = mse_matrix(1, eff, pair.w1, pair.w2, params)
        e2 = mse_matrix(2, eff, pair.w1, pair.w2, params)
        weights = wmmse_weights(lam, e1, e2)
        pair = bisect_mu(eff, weights, (u1, u2), power, params, tol_p)
    return pair


def sum_rate_wmmse(
    eff: EffectiveChannels,
    power: float,
    params: SystemParams,
    w_init: PrecoderPair | None = None,
    inner_iters: int = 1,
    tol_p: float = DEFAULT_POWER_TOL,
) -> PrecoderPair:
    """Conventional sum-rate WMMSE pass (equal, unscaled weights)."""
    if w_init is None:
        w_init = default_precoder_init(eff, power)
    pair = w_init
    for _ in range(inner_iters):
        u1 = mmse_equalizer(1, eff, pair.w1, pair.w2, params)
        u2 = mmse_equalizer(2, eff, pair.w1, pair.w2, params)
        e1 = mse_matrix(1, eff, pair.w1, pair.w2, params)
        e2 = mse_matrix(2, eff, pair.w1, pair.w2, params)
        weights = conventional_weights(e1, e2)
        pair = bisect_mu(eff, weights, (u1, u2), power, params, tol_p)
    return pair


def _revive_zero_blocks(
    eff: EffectiveChannels, pair: PrecoderPair, power: float
) -> PrecoderPair:
    """A zero precoder block is a fixed point of the MMSE alternation (its
    equalizer is zero); restart such blocks from the matched-filter init."""
    w1, w2 = pair.w1, pair.w2
    changed = False
    init = None
    if not np.any(w1) and np.any(eff.h1):
        init = default_precoder_init(eff, power)
        w1, changed = init.w1, True
    if not np.any(w2) and np.any(eff.h2):
        init = init or default_precoder_init(eff, power)
        w2, changed = init.w2, True
    if not changed:
        return pair
    scale = total_power(w1, w2)
    if scale > power:
        factor = np.sqrt(power / scale)
        w1, w2 = w1 * factor, w2 * factor
    return PrecoderPair(w1, w2, pair.mu)


def default_precoder_init(eff: EffectiveChannels, power: float) -> PrecoderPair:
    """Power-scaled matched-filter initialization W_k ~ H_k^H.

    The per-receiver split assigns each precoder half the budget, scaled by
    its own channel's Frobenius norm; all-zero channels get a zero precoder.
    """
    n = eff.h1.shape[1]
    mats = []
    for h in (eff.h1, eff.h2):
        w = np.zeros((n, n), dtype=complex)
        norm = np.linalg.norm(h)
        if norm > 0:
            cols = min(n, h.shape[0])
            w[:, :cols] = np.sqrt(power / 2.0) * h.conj().T[:, :cols] / norm
        mats.append(w)
    return PrecoderPair(mats[0], mats[1], 0.0)
