import functools

import pytest
from hypothesis import HealthCheck, settings

from weakgamma.measures import build_grid, double_well, gaussian, subbotin, uniform
from weakgamma.spectral import discretize

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def generator(name: str, resolution: int = 2001):
    pots = {"gaussian": gaussian, "uniform": uniform, "double_well": double_well,
            "subbotin1.5": lambda: subbotin(1.5), "subbotin2": lambda: subbotin(2.0),
            "subbotin3": lambda: subbotin(3.0), "subbotin4": lambda: subbotin(4.0)}
    return discretize(build_grid(pots[name](), resolution))


@pytest.fixture(scope="session")
def gauss_gen():
    return generator("gaussian")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
