import os

import pytest
from hypothesis import HealthCheck, settings

from noisydup.model import ber_half_source, make_bsc_noise, make_markov_source

os.environ.setdefault("NOISYDUP_WORKERS", "1")

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def ber_half():
    return ber_half_source()


@pytest.fixture
def sticky_source():
    return make_markov_source((0, 1), [[0.9, 0.1], [0.1, 0.9]])


@pytest.fixture
def bsc01():
    return make_bsc_noise(0.1)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
