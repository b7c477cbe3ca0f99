import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from psrolab.game import Game

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_skew(n, seed, scale=1.0):
    a = np.random.default_rng(seed).uniform(-scale, scale, size=(n, n))
    return Game((a - a.T) / 2)


@pytest.fixture
def rps_game():
    from psrolab.game import rps

    return rps()


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
