import math
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from edtc.core import validate_params

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CORPUS = Path(__file__).parent / "corpus"

# Lines collected by the acceptance module, echoed in the terminal summary
# so they show up even when output capture is on.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def physical_params(draw, max_ratio=1000.0):
    """SystemParams with T1/T2 in [0.5, max_ratio] (t2 = 1) and |M_eq| <= 1."""
    ratio = draw(st.floats(0.5, max_ratio))
    m_eq = draw(st.floats(-1.0, 1.0))
    return validate_params({"t1": ratio, "t2": 1.0, "m_eq": m_eq})


@st.composite
def bloch_vectors(draw):
    """Points in the closed unit ball."""
    r = draw(st.floats(0.0, 1.0))
    th = draw(st.floats(0.0, math.pi))
    ph = draw(st.floats(0.0, 2 * math.pi))
    return (r * math.sin(th) * math.cos(ph), r * math.sin(th) * math.sin(ph), r * math.cos(th))


@pytest.fixture
def fig1_params():
    return validate_params({"t1": 100.0, "t2": 1.0, "m_eq": 0.8})
