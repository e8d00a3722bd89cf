"""Stochastic mmWave channel generation.

Each link combines a three-state (outage / LOS / NLOS) large-scale draw with
Rician or Rayleigh small-scale fading. A full realization samples the two
direct links plus the three always-LOS RIS-side links from one seeded stream.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .config import Geometry, PathlossCoeffs, PropagationState, SystemParams


class ChannelError(ValueError):
    pass


class RisMode(enum.Enum):
    ON = "on"
    OFF = "off"


@dataclass(frozen=True)
class ChannelRealization:
    """One sampled draw of the five fronthaul channel matrices.

    h_s1: direct AP -> CPU radio head (n_cpu x n_ap)
    h_s2: direct AP -> nearest master AP (n_ap x n_ap)
    h_t:  AP -> RIS (m_ris x n_ap)
    h_r1: RIS -> CPU radio head (n_cpu x m_ris)
    h_r2: RIS -> nearest master AP (n_ap x m_ris)
    """

    h_s1: np.ndarray
    h_s2: np.ndarray
    h_t: np.ndarray
    h_r1: np.ndarray
    h_r2: np.ndarray
    state_s1: PropagationState
    state_s2: PropagationState
    seed_id: int = 0


def largescale_gain(d: float, cond: PropagationState, coeffs: PathlossCoeffs) -> float:
    """Linear power gain 10^(rho_dB/10) with rho_dB = -a - 10 b log10(d/d0)."""
    if cond is PropagationState.OUTAGE:
        raise ChannelError("outage has no finite gain; zero the matrix instead")
    if not d > 0:
        raise ChannelError(f"distance must be positive, got {d}")
    if cond is PropagationState.LOS:
        a, b = coeffs.a_los, coeffs.b_los
    else:
        a, b = coeffs.a_nlos, coeffs.b_nlos
    rho_db = -a - 10.0 * b * math.log10(d / coeffs.d0)
    return 10.0 ** (rho_db / 10.0)


def state_pmf(d: float, coeffs: PathlossCoeffs) -> tuple[float, float, float]:
    """(p_out, p_los, p_nlos) of the three-state model at distance d."""
    if d < 0:
        raise ChannelError("distance must be non-negative")
    p_out = max(0.0, 1.0 - math.exp(-coeffs.a_out * d + coeffs.b_out))
    p_los = (1.0 - p_out) * math.exp(-coeffs.a_los_decay * d)
    p_nlos = 1.0 - p_los - p_out
    # Guard against tiny negative round-off in the complement.
    p_nlos = max(0.0, p_nlos)
    return p_out, p_los, p_nlos


_STATE_ORDER = (PropagationState.OUTAGE, PropagationState.LOS, PropagationState.NLOS)


def sample_state(
    d: float, coeffs: PathlossCoeffs, rng: np.random.Generator
) -> PropagationState:
    """Inverse-CDF draw over (outage, LOS, NLOS)."""
    p_out, p_los, _ = state_pmf(d, coeffs)
    u = rng.random()
    if u < p_out:
        return PropagationState.OUTAGE
    if u < p_out + p_los:
        return PropagationState.LOS
    return PropagationState.NLOS


def ula_response(n: int, azimuth: float) -> np.ndarray:
    """Half-wavelength uniform linear array response; unit-modulus entries."""
    idx = np.arange(n)
    return np.exp(1j * np.pi * idx * math.sin(azimuth))


def upa_response(shape: tuple[int, int], azimuth: float) -> np.ndarray:
    """Square planar array response with elevation neglected (2D geometry).

    The horizontal axis steers with the azimuth; the vertical axis sees
    broadside and contributes a constant phase.
    """
    nx, ny = shape
    horiz = np.exp(1j * np.pi * np.arange(nx) * math.sin(azimuth))
    return np.kron(horiz, np.ones(ny))


def smallscale_fading(
    rows: int,
    cols: int,
    cond: PropagationState,
    kappa: float,
    rng: np.random.Generator,
    steering: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """Unit-average-power small-scale fading matrix.

    NLOS: i.i.d. CN(0, 1) entries. LOS: Rician mixture of a rank-one
    steering outer product and a CN(0, 1) scatter term.
    """
    if cond is PropagationState.OUTAGE:
        raise ChannelError("no fading is defined for the outage state")
    scatter = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2.0)
    if cond is PropagationState.NLOS:
        return scatter
    if steering is None:
        a_rx = np.ones(rows, dtype=complex)
        a_tx = np.ones(cols, dtype=complex)
    else:
        a_rx, a_tx = steering
        if a_rx.shape != (rows,) or a_tx.shape != (cols,):
            raise ChannelError("steering vector shapes do not match matrix dims")
    los = np.outer(a_rx, a_tx.conj())
    return math.sqrt(kappa / (1.0 + kappa)) * los + math.sqrt(1.0 / (1.0 + kappa)) * scatter


def _azimuth(src: tuple[float, float], dst: tuple[float, float]) -> float:
    return math.atan2(dst[1] - src[1], dst[0] - src[0])


def draw_realization(
    geom: Geometry,
    params: SystemParams,
    coeffs: PathlossCoeffs,
    ris_mode: RisMode,
    rng: np.random.Generator,
    seed_id: int = 0,
) -> ChannelRealization:
    """Sample all five channel matrices for one Monte Carlo realization.

    The stream consumption order is fixed so that realizations are paired
    across RIS modes: RIS-side links are always drawn and zeroed afterwards
    when ris_mode is OFF.
    """
    pos_ap = geom.pos_dmap
    pos_near = geom.pos_nearest_ap
    pos_cpu = geom.pos_cpu
    pos_ris = geom.pos_ris
    panel = params.ris_panel_shape()
    kappa = params.rician_kappa

    def direct_link(rows: int, cols: int, d: float, rx: tuple, tx: tuple):
        state = sample_state(d, coeffs, rng)
        if state is PropagationState.OUTAGE:
            # Keep the stream aligned with the non-outage branch.
            rng.standard_normal((rows, cols))
            rng.standard_normal((rows, cols))
            return np.zeros((rows, cols), dtype=complex), state
        steer = (ula_response(rows, _azimuth(rx, tx)), ula_response(cols, _azimuth(tx, rx)))
        beta = smallscale_fading(rows, cols, state, kappa, rng, steer)
        return math.sqrt(largescale_gain(d, state, coeffs)) * beta, state

    def ris_link(rows: int, cols: int, d: float, rx: tuple, tx: tuple, rx_is_ris: bool):
        # RIS-side links are positioned for guaranteed LOS.
        if rx_is_ris:
            a_rx = upa_response(panel, _azimuth(rx, tx))
            a_tx = ula_response(cols, _azimuth(tx, rx))
        else:
            a_rx = ula_response(rows, _azimuth(rx, tx))
            a_tx = upa_response(panel, _azimuth(tx, rx))
        beta = smallscale_fading(rows, cols, PropagationState.LOS, kappa, rng, (a_rx, a_tx))
        return math.sqrt(largescale_gain(d, PropagationState.LOS, coeffs)) * beta

    h_s1, state_s1 = direct_link(
        params.n_cpu, params.n_ap, geom.distance(pos_ap, pos_cpu), pos_cpu, pos_ap
    )
    h_s2, state_s2 = direct_link(
        params.n_ap, params.n_ap, geom.distance(pos_ap, pos_near), pos_near, pos_ap
    )
    h_t = ris_link(
        params.m_ris, params.n_ap, geom.distance(pos_ap, pos_ris), pos_ris, pos_ap, True
    )
    h_r1 = ris_link(
        params.n_cpu, params.m_ris, geom.distance(pos_ris, pos_cpu), pos_cpu, pos_ris, False
    )
    h_r2 = ris_link(
        params.n_ap, params.m_ris, geom.distance(pos_ris, pos_near), pos_near, pos_ris, False
    )
    if ris_mode is RisMode.OFF:
        h_t = np.zeros_like(h_t)
        h_r1 = np.zeros_like(h_r1)
        h_r2 = np.zeros_like(h_r2)
    return ChannelRealization(h_s1, h_s2, h_t, h_r1, h_r2, state_s1, state_s2, seed_id)


def realization_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent stream for realization `index` under one master seed."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def solver_rng(master_seed: int, index: int) -> np.random.Generator:
    """Stream for solver-side randomness (initial phases), decoupled from
    the channel stream so modes share identical channel draws."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index, 1)))
