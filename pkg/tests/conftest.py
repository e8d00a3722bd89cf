import numpy as np
import pytest

from fronthaulsim.channel import ChannelRealization
from fronthaulsim.config import PathlossCoeffs, PropagationState, SystemParams

# (criterion, passed) pairs filled in by the acceptance tests; echoed at the
# end of the run so each criterion shows one explicit pass/fail line.
ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")


@pytest.fixture
def coeffs():
    return PathlossCoeffs.load_default()


@pytest.fixture
def small_params():
    """Reduced antenna/element counts for fast numerical tests."""
    return SystemParams(n_ap=3, n_cpu=2, m_ris=9)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_realization(
    rng,
    params: SystemParams,
    direct_scale: float = 1e-6,
    ris_scale: float = 1e-5,
) -> ChannelRealization:
    """Unstructured random realization at magnitudes typical of the pathloss
    model, for solver and gradient tests that need all links present."""
    return ChannelRealization(
        h_s1=direct_scale * crandn(rng, params.n_cpu, params.n_ap),
        h_s2=direct_scale * crandn(rng, params.n_ap, params.n_ap),
        h_t=ris_scale * crandn(rng, params.m_ris, params.n_ap),
        h_r1=ris_scale * crandn(rng, params.n_cpu, params.m_ris),
        h_r2=ris_scale * crandn(rng, params.n_ap, params.m_ris),
        state_s1=PropagationState.LOS,
        state_s2=PropagationState.LOS,
    )
