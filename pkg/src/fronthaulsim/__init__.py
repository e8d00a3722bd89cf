"""Seedable Monte Carlo simulator for RIS-assisted wireless fronthaul
survivability in cell-free massive MIMO systems."""

__version__ = "0.1.0"

from .channel import ChannelRealization, RisMode, draw_realization
from .config import (
    ControllerConfig,
    FronthaulSpec,
    Geometry,
    PathlossCoeffs,
    PropagationState,
    SystemParams,
)
from .controller import SolveOutcome, SolveStatus, solve_no_ris, solve_realization
from .rates import EffectiveChannels, RateReport, effective_channel, individual_rate
from .survivability import (
    Mode,
    ScenarioConfig,
    SurvivabilityCurve,
    fronthaul_demand,
    reduction_at,
    run_scenario,
)
