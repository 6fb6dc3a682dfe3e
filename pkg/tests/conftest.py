import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bipartition import DivisionSpec, build, two_body_transform

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

M_E, M_P = 1.0, 1836.0

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def split12():
    return DivisionSpec("12", {"1": [0], "2": [1]})


@pytest.fixture
def pair():
    """Unit-mass oscillators coupled by 0.5 x1 x2."""
    return build([1.0, 1.0], [[1.0, 0.5], [0.5, 1.0]])


@pytest.fixture
def hydrogen():
    return build([M_E, M_P], [[1.0, -1.0], [-1.0, 1.0]])


@pytest.fixture
def cm_rel():
    return two_body_transform(M_E, M_P)
