import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from biphoton import CorrelationKernel, make_grating

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# lines added by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def grating():
    """Twenty slits, s = d/2, in units of the period."""
    return make_grating(1.0, 0.5, 20)


@pytest.fixture
def small_grating():
    return make_grating(2.0, 1.0, 4)


@pytest.fixture
def gaussian():
    return CorrelationKernel.gaussian(0.56)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
