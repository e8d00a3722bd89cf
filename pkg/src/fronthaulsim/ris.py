"""Phase-shift optimization on the unit-modulus manifold.

The Lagrangian's Euclidean gradient over the phase vector follows from the
matrix chain rule through the cascaded channel; descent runs with tangent
projection, an angle retraction and a normalized, backtracked step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .config import SystemParams
from .rates import EffectiveChannels, effective_channel, rate_bpshz

_LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class PhaseVector:
    """Unit-modulus phase configuration plus the base step size used."""

    phi: np.ndarray
    step_eta: float = 0.1


def random_phases(m: int, rng: np.random.Generator) -> np.ndarray:
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=m))


def rate_channel_gradient(
    k: int, eff: EffectiveChannels, w1: np.ndarray, w2: np.ndarray, params: SystemParams
) -> np.ndarray:
    """dR_k/dH_k in bits/s/Hz units, shape (n_tx, n_rx).

    Two-term form: the signal-plus-interference inverse minus the
    interference-only inverse, each right-multiplied into A H^H.
    """
    h = eff.get(k)
    sigma2 = params.noise_power_w
    w_own = w1 if k == 1 else w2
    w_other = w2 if k == 1 else w1
    a_all = w_own @ w_own.conj().T + w_other @ w_other.conj().T
    a_int = w_other @ w_other.conj().T
    n_rx = h.shape[0]
    eye = np.eye(n_rx)

    def term(a: np.ndarray) -> np.ndarray:
        ah = a @ h.conj().T
        cov = h @ ah + sigma2 * eye
        cov = 0.5 * (cov + cov.conj().T)
        return np.linalg.solve(cov.conj().T, ah.conj().T).conj().T

    return (term(a_all) - term(a_int)) / _LN2


def _per_rate_phase_gradient(
    real: ChannelRealization,
    eff: EffectiveChannels,
    k: int,
    w1: np.ndarray,
    w2: np.ndarray,
    params: SystemParams,
) -> np.ndarray:
    """dR_k/dphi_m^* as a length-M vector (conjugate Wirtinger gradient)."""
    g = rate_channel_gradient(k, eff, w1, w2, params)  # (n_tx, n_rx)
    h_r = real.h_r1 if k == 1 else real.h_r2
    # Column m of (G^H H_t^H) pairs with column m of H_r.
    y = g.conj().T @ real.h_t.conj().T  # (n_rx, M)
    return np.einsum("im,im->m", h_r.conj(), y)


def phase_gradient_weighted(
    real: ChannelRealization,
    eff: EffectiveChannels,
    w1: np.ndarray,
    w2: np.ndarray,
    c1: float,
    c2: float,
    params: SystemParams,
) -> np.ndarray:
    """Euclidean gradient of c1 R_1 + c2 R_2 over phi (conjugate convention)."""
    out = np.zeros(real.h_t.shape[0], dtype=complex)
    if c1 != 0.0:
        out += c1 * _per_rate_phase_gradient(real, eff, 1, w1, w2, params)
    if c2 != 0.0:
        out += c2 * _per_rate_phase_gradient(real, eff, 2, w1, w2, params)
    return out


def euclidean_phase_gradient(
    real: ChannelRealization,
    eff: EffectiveChannels,
    w1: np.ndarray,
    w2: np.ndarray,
    lam: float,
    params: SystemParams,
) -> np.ndarray:
    """Gradient of the Lagrangian (1-lam) R_2 - lam R_1 over the phases."""
    return phase_gradient_weighted(real, eff, w1, w2, -lam, 1.0 - lam, params)


def euclidean_phase_gradient_elementwise(
    real: ChannelRealization,
    eff: EffectiveChannels,
    w1: np.ndarray,
    w2: np.ndarray,
    lam: float,
    params: SystemParams,
) -> np.ndarray:
    """Per-element trace form of the same gradient; kept as a cross-check."""
    m_ris = real.h_t.shape[0]
    out = np.zeros(m_ris, dtype=complex)
    for k, coeff in ((1, -lam), (2, 1.0 - lam)):
        if coeff == 0.0:
            continue
        g = rate_channel_gradient(k, eff, w1, w2, params)
        h_r = real.h_r1 if k == 1 else real.h_r2
        for m in range(m_ris):
            outer = np.outer(real.h_t[m].conj(), h_r[:, m].conj())  # dH^H/dphi_m^*
            out[m] += coeff * np.trace(g.conj().T @ outer)
    return out


def riemannian_project(egrad: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Remove the radial component: egrad - Re(egrad^* phi) phi, elementwise."""
    return egrad - np.real(egrad.conj() * phi) * phi


def retract_update(phi: np.ndarray, rgrad: np.ndarray, eta: float) -> np.ndarray:
    """Step against the Riemannian gradient and snap back to unit modulus."""
    if eta <= 0:
        raise ValueError("step size must be positive")
    moved = phi - eta * rgrad
    # A vanishing intermediate point has no angle; keep the previous phase.
    dead = moved == 0
    if np.any(dead):
        moved = np.where(dead, phi, moved)
    return np.exp(1j * np.angle(moved))


def optimize_phases(
    real: ChannelRealization,
    w1: np.ndarray,
    w2: np.ndarray,
    lam: float,
    params: SystemParams,
    iters: int,
    eta: float,
    phi0: np.ndarray,
    maximize_sum: bool = False,
    rel_tol: float = 1e-7,
) -> PhaseVector:
    """Projected gradient descent over the phase torus.

    The step is normalized by the gradient's max modulus and halved (up to
    10 times) whenever the objective fails to decrease. Returns the best
    iterate observed; the loop exits early once progress stalls.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if maximize_sum:
        c1, c2 = -1.0, -1.0
    else:
        c1, c2 = -lam, 1.0 - lam

    def objective(eff: EffectiveChannels) -> float:
        r1 = rate_bpshz(1, eff, w1, w2, params)
        r2 = rate_bpshz(2, eff, w1, w2, params)
        return c1 * r1 + c2 * r2

    phi = phi0
    eff = effective_channel(real, phi)
    value = objective(eff)
    best_phi, best_value = phi, value
    for _ in range(iters):
        egrad = phase_gradient_weighted(real, eff, w1, w2, c1, c2, params)
        rgrad = riemannian_project(egrad, phi)
        gmax = float(np.max(np.abs(rgrad))) if rgrad.size else 0.0
        if gmax < 1e-14:
            break
        step = eta / gmax
        accepted = False
        for _ in range(11):
            cand = retract_update(phi, rgrad, step)
            cand_eff = effective_channel(real, cand)
            cand_value = objective(cand_eff)
            if cand_value <= value:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        improvement = value - cand_value
        phi, eff, value = cand, cand_eff, cand_value
        if value < best_value:
            best_phi, best_value = phi, value
        if improvement <= rel_tol * (1.0 + abs(value)):
            break
    return PhaseVector(best_phi, eta)
