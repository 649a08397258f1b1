import math

import pytest

from balpot import BackgroundPotential, PointMass

# criterion number -> (title, passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def record():
    def _record(number: int, title: str, passed: bool, detail: str) -> None:
        ACCEPTANCE[number] = (title, bool(passed), detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {number}. {title}: {detail}")


@pytest.fixture(scope="session")
def ginibre():
    return BackgroundPotential(0.5, (), 1.0)


@pytest.fixture(scope="session")
def annulus_Q():
    """alpha = 1/2, a unit point mass at 0.3, t = 1: R = sqrt 2, hole radius 1."""
    return BackgroundPotential(0.5, (PointMass(0.3, 1.0),), 1.0)


SQRT2 = math.sqrt(2.0)
