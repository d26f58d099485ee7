import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from blaschke_sums import BlaschkeProduct

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def z2():
    return BlaschkeProduct([0, 0])


@pytest.fixture
def z2g():
    """z^2 (z - 0.5) / (1 - 0.5 z)."""
    return BlaschkeProduct([0, 0, 0.5])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
