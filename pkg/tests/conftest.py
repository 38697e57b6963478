import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import CANONICAL, CASE_D_SMALL  # noqa: E402

from nwcgps.oracle import solve_stationary  # noqa: E402
from nwcgps.rh_solver import RHSolver  # noqa: E402


@pytest.fixture(scope="session")
def canonical():
    return CANONICAL


@pytest.fixture(scope="session")
def solver():
    return RHSolver(CANONICAL)


@pytest.fixture(scope="session")
def grid():
    return solve_stationary(CANONICAL, 400)


@pytest.fixture(scope="session")
def solver_d():
    return RHSolver(CASE_D_SMALL)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
