"""Shared numerical kernel: effective channels, rates, MSE matrices, Lagrangian.

Rates are computed internally in bits/s/Hz (spectral efficiency); callers
multiply by the bandwidth only at reporting boundaries. All positive-definite
solves go through Hermitian factorizations and the log-det is accumulated in
the log domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .config import SystemParams

_LN2 = float(np.log(2.0))


class RateComputationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class EffectiveChannels:
    """H_k = H_s,k + H_r,k diag(phi) H_t for the two receivers."""

    h1: np.ndarray
    h2: np.ndarray

    def get(self, k: int) -> np.ndarray:
        if k == 1:
            return self.h1
        if k == 2:
            return self.h2
        raise ValueError(f"receiver index must be 1 or 2, got {k}")


@dataclass(frozen=True)
class RateReport:
    """Per-receiver rates in bits/s. c_delta is the redundancy the secondary
    backup link requires, which equals r2 at optimality."""

    r1: float
    r2: float
    feasible: bool

    @property
    def sum(self) -> float:
        return self.r1 + self.r2

    @property
    def c_delta(self) -> float:
        return self.r2


def effective_channel(real: ChannelRealization, phi: np.ndarray) -> EffectiveChannels:
    """Combine direct and RIS-cascaded paths for both receivers."""
    phi = np.asarray(phi)
    m = real.h_t.shape[0]
    if phi.shape != (m,):
        raise ValueError(f"phi must have shape ({m},), got {phi.shape}")
    reflected = phi[:, None] * real.h_t  # diag(phi) @ H_t
    h1 = real.h_s1 + real.h_r1 @ reflected
    h2 = real.h_s2 + real.h_r2 @ reflected
    return EffectiveChannels(h1, h2)


def _hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def _logdet_i_plus(a: np.ndarray) -> float:
    """log2 det(I + A) for Hermitian PSD A, via Cholesky with eig fallback."""
    n = a.shape[0]
    mat = np.eye(n) + _hermitize(a)
    try:
        chol = np.linalg.cholesky(mat)
        val = 2.0 * float(np.sum(np.log(np.abs(np.diag(chol))))) / _LN2
    except np.linalg.LinAlgError:
        eig = np.linalg.eigvalsh(mat)
        if np.any(eig <= 0):
            raise RateComputationError("I + A is not positive definite")
        val = float(np.sum(np.log(eig))) / _LN2
    if not np.isfinite(val):
        raise RateComputationError("non-finite log-determinant")
    return val


def _gram(h: np.ndarray, w: np.ndarray) -> np.ndarray:
    hw = h @ w
    return hw @ hw.conj().T


def rate_bpshz(
    k: int, eff: EffectiveChannels, w1: np.ndarray, w2: np.ndarray, params: SystemParams
) -> float:
    """Spectral efficiency of receiver k in bits/s/Hz."""
    h = eff.get(k)
    sigma2 = params.noise_power_w
    w_own = w1 if k == 1 else w2
    w_other = w2 if k == 1 else w1
    interf = _gram(h, w_other) / sigma2
    signal = _gram(h, w_own) / sigma2
    r = _logdet_i_plus(interf + signal) - _logdet_i_plus(interf)
    return max(r, 0.0)


def individual_rate(
    k: int, eff: EffectiveChannels, w1: np.ndarray, w2: np.ndarray, params: SystemParams
) -> float:
    """Rate of receiver k in bits/s."""
    return params.bandwidth_hz * rate_bpshz(k, eff, w1, w2, params)


def mse_matrix(
    k: int, eff: EffectiveChannels, w1: np.ndarray, w2: np.ndarray, params: SystemParams
) -> np.ndarray:
    """Posterior MSE matrix E_k = (I + W_k^H H_k^H Q_k^-1 H_k W_k)^-1."""
    h = eff.get(k)
    sigma2 = params.noise_power_w
    w_own = w1 if k == 1 else w2
    w_other = w2 if k == 1 else w1
    q = _hermitize(_gram(h, w_other)) + sigma2 * np.eye(h.shape[0])
    hw = h @ w_own
    inner = hw.conj().T @ np.linalg.solve(q, hw)
    n = w_own.shape[1]
    e = np.linalg.inv(np.eye(n) + _hermitize(inner))
    return _hermitize(e)


def mmse_equalizer(
    k: int, eff: EffectiveChannels, w1: np.ndarray, w2: np.ndarray, params: SystemParams
) -> np.ndarray:
    """U_k = W_k^H H_k^H (H_k W W^H H_k^H + B N0 I)^-1."""
    h = eff.get(k)
    sigma2 = params.noise_power_w
    w_own = w1 if k == 1 else w2
    cov = _hermitize(_gram(h, w1) + _gram(h, w2)) + sigma2 * np.eye(h.shape[0])
    rhs = h @ w_own  # cov^-1 applied from the right via a Hermitian solve
    return np.linalg.solve(cov, rhs).conj().T


def lagrangian_bpshz(
    eff: EffectiveChannels,
    w1: np.ndarray,
    w2: np.ndarray,
    lam: float,
    c0_bpshz: float,
    params: SystemParams,
) -> float:
    """L = R_2 + lambda (C_0 - R_1 - R_2), all terms in bits/s/Hz."""
    r1 = rate_bpshz(1, eff, w1, w2, params)
    r2 = rate_bpshz(2, eff, w1, w2, params)
    return r2 + lam * (c0_bpshz - r1 - r2)
