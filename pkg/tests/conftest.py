import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from guesswork.probability import Pmf

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def pmfs(draw, min_size=2, max_size=8, min_prob=1e-3):
    """Strictly positive PMFs with a floor so logs stay tame."""
    k = draw(st.integers(min_size, max_size))
    w = draw(st.lists(st.floats(min_prob, 1.0), min_size=k, max_size=k))
    return Pmf.from_weights(range(k), w)


def random_pmf(rng: np.random.Generator, k: int, alpha: float = 1.0) -> Pmf:
    return Pmf.from_weights(range(k), rng.dirichlet(np.full(k, alpha)))


@pytest.fixture
def ber02():
    return Pmf.bernoulli(0.2)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
