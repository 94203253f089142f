import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sparserips import from_points

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_space(rng, n, dim=2):
    return from_points(rng.random((n, dim)))


@pytest.fixture
def line_space():
    """Points 0, 1, 2, 10 on a line."""
    return from_points([[0.0], [1.0], [2.0], [10.0]])


@pytest.fixture
def square_space():
    return from_points([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda s: (int("".join(c for c in s.split()[0] if c.isdigit())), s)):
        ok, detail = RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
