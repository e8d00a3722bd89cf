"""Static configuration types: radio constants, geometry, pathloss coefficients.

All values are plain SI units (meters, Hz, watts). dB-domain quantities are
only used inside the pathloss model and converted to linear scale at the
channel-sampling boundary.
"""

from __future__ import annotations

import enum
import importlib.resources
import math
import os
from dataclasses import dataclass, field

import yaml

# Thermal noise floor at 290 K in dBm/Hz.
THERMAL_NOISE_DBM_HZ = -174.0

COEFFS_ENV_VAR = "FRONTHAULSIM_COEFFS"


class ConfigError(ValueError):
    """Raised when a configuration value violates its declared invariants."""


class PropagationState(enum.Enum):
    OUTAGE = "outage"
    LOS = "los"
    NLOS = "nlos"


def noise_psd_from_figure(noise_figure_db: float) -> float:
    """Noise power spectral density in W/Hz for a given receiver noise figure."""
    return 10.0 ** ((THERMAL_NOISE_DBM_HZ + noise_figure_db) / 10.0) * 1e-3


@dataclass(frozen=True)
class SystemParams:
    """Radio constants shared by every channel realization and solver call."""

    bandwidth_hz: float = 200e6
    noise_psd: float = field(default_factory=lambda: noise_psd_from_figure(7.0))
    power_budget_w: float = 10.0
    n_ap: int = 32
    n_cpu: int = 32
    m_ris: int = 1024
    rician_kappa: float = 10.0

    def __post_init__(self):
        for name in ("bandwidth_hz", "noise_psd", "power_budget_w", "rician_kappa"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be strictly positive")
        for name in ("n_ap", "n_cpu", "m_ris"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")

    @property
    def noise_power_w(self) -> float:
        """Total noise power B*N0 over the full bandwidth."""
        return self.bandwidth_hz * self.noise_psd

    def ris_panel_shape(self) -> tuple[int, int]:
        """Square factorization of the RIS element count for the planar array."""
        side = math.isqrt(self.m_ris)
        if side * side != self.m_ris:
            raise ConfigError(
                f"m_ris={self.m_ris} is not a perfect square; geometric steering "
                "requires a square planar array"
            )
        return side, side


@dataclass(frozen=True)
class Geometry:
    """2D node placement. The disconnected master AP sits at the origin,
    the nearest master AP at (0, d_ap), the CPU radio head at (d_cpu, 0)
    and the RIS at (d_cpu, d_ris_cpu)."""

    d_ap: float = 50.0
    d_cpu: float = 200.0
    d_ris_cpu: float = 5.0

    def __post_init__(self):
        for name in ("d_ap", "d_cpu", "d_ris_cpu"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be strictly positive and finite")

    @property
    def pos_dmap(self) -> tuple[float, float]:
        return (0.0, 0.0)

    @property
    def pos_nearest_ap(self) -> tuple[float, float]:
        return (0.0, self.d_ap)

    @property
    def pos_cpu(self) -> tuple[float, float]:
        return (self.d_cpu, 0.0)

    @property
    def pos_ris(self) -> tuple[float, float]:
        return (self.d_cpu, self.d_ris_cpu)

    def distance(self, a: tuple[float, float], b: tuple[float, float]) -> float:
        return math.hypot(a[0] - b[0], a[1] - b[1])


@dataclass(frozen=True)
class PathlossCoeffs:
    """dB-domain pathloss intercept/slope pairs plus the three-state PMF
    length scales. Defaults follow published 28 GHz urban measurements; the
    YAML coefficient file is the authoritative source (see data/ directory).
    """

    a_los: float = 61.4
    b_los: float = 2.0
    a_nlos: float = 72.0
    b_nlos: float = 2.92
    d0: float = 1.0
    a_out: float = 0.0334
    b_out: float = 5.2
    a_los_decay: float = 0.0149

    def __post_init__(self):
        if not (self.b_los > 0 and self.b_nlos > 0):
            raise ConfigError("pathloss slopes must be positive")
        if not self.a_out > 0:
            raise ConfigError("a_out must be positive")
        if not self.d0 > 0:
            raise ConfigError("d0 must be positive")

    @classmethod
    def from_mapping(cls, data: dict) -> "PathlossCoeffs":
        try:
            return cls(
                a_los=float(data["los"]["a_db"]),
                b_los=float(data["los"]["b"]),
                a_nlos=float(data["nlos"]["a_db"]),
                b_nlos=float(data["nlos"]["b"]),
                d0=float(data.get("d0_m", 1.0)),
                a_out=float(data["a_out"]),
                b_out=float(data["b_out"]),
                a_los_decay=float(data["a_los_decay"]),
            )
        except KeyError as exc:
            raise ConfigError(f"coefficient file missing key: {exc}") from exc

    @classmethod
    def from_yaml(cls, path: str) -> "PathlossCoeffs":
        with open(path, "r") as fh:
            data = yaml.safe_load(fh)
        if not isinstance(data, dict):
            raise ConfigError(f"coefficient file {path} is not a mapping")
        return cls.from_mapping(data)

    @classmethod
    def default_file(cls) -> str:
        """Path to the bundled coefficient file, honoring the env override."""
        override = os.environ.get(COEFFS_ENV_VAR)
        if override:
            return override
        return str(importlib.resources.files("fronthaulsim.data") / "mmwave_28ghz.yaml")

    @classmethod
    def load_default(cls) -> "PathlossCoeffs":
        return cls.from_yaml(cls.default_file())


@dataclass(frozen=True)
class FronthaulSpec:
    """Functional-split fronthaul demand parameters."""

    n_used: int = 400
    n_bit: int = 12
    n_ac: int = 12
    t_s: float = 71.4e-6

    def __post_init__(self):
        if self.n_used < 0:
            raise ConfigError("n_used must be non-negative")
        for name in ("n_bit", "n_ac"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if not self.t_s > 0:
            raise ConfigError("t_s must be strictly positive")


@dataclass(frozen=True)
class ControllerConfig:
    """Knobs of the alternating rate-control loop."""

    c0: float = 1.6134453781512605e9
    max_outer: int = 100
    max_phase_steps: int = 50
    alpha: float = 0.5
    eta: float = 0.1
    lambda_max: float = 1e3
    tol_rate: float = 1e-3
    inner_wmmse_iters: int = 1

    def __post_init__(self):
        if self.max_outer < 1 or self.max_phase_steps < 1:
            raise ConfigError("iteration counts must be >= 1")
        if not (self.alpha > 0 and self.eta > 0):
            raise ConfigError("step sizes must be positive")
        if not self.c0 > 0:
            raise ConfigError("c0 must be positive")
