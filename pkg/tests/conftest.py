import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_triangle(rng, scale=1.0):
    """Counterclockwise triangle with a minimum angle bounded away from zero."""
    while True:
        p = rng.uniform(-1, 1, size=(3, 2)) * scale
        d1, d2 = p[1] - p[0], p[2] - p[0]
        area = 0.5 * (d1[0] * d2[1] - d1[1] * d2[0])
        if area < 0:
            p = p[[0, 2, 1]]
            area = -area
        sides = np.linalg.norm(p - p[[1, 2, 0]], axis=1)
        if area > 0.05 * max(sides) ** 2 / 2:
            return p
