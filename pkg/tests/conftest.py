import math

import pytest
from hypothesis import HealthCheck, settings

from cbmkit.geometry import box, disc, make_grid
from cbmkit.measures import homogeneous_measure, warped_measure
from cbmkit.onedim import power_exp_law

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("default")


@pytest.fixture(scope="session")
def g2():
    return make_grid(2, 1024)


@pytest.fixture(scope="session")
def g4096():
    return make_grid(2, 4096)


@pytest.fixture(scope="session")
def g3():
    return make_grid(3, 8192)


@pytest.fixture(scope="session")
def inv_cube(g2):
    """The density |x|^-3 on the plane."""
    return homogeneous_measure(1.0, -1.0 / 3, g2)


@pytest.fixture(scope="session")
def lebesgue(g2):
    return homogeneous_measure(1.0, math.inf, g2)


@pytest.fixture(scope="session")
def warped_exp(g2):
    return warped_measure(1.0, disc(g2, 1.0), power_exp_law())


@pytest.fixture(scope="session")
def unit_disc(g2):
    return disc(g2, 1.0)


@pytest.fixture(scope="session")
def unit_square(g2):
    return box(g2, [-1.0, -1.0], [1.0, 1.0])


_CRITERIA: dict = {}


@pytest.fixture(scope="session")
def record():
    """Store one verdict line per acceptance criterion."""
    def _record(number: int, title: str, passed: bool, detail: str = ""):
        _CRITERIA[number] = (title, bool(passed), detail)
        print(f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {title} {detail}")
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d} [{'PASS' if ok else 'FAIL'}] {title}  {detail}")
