"""Shared fixtures: the expensive half-line solves are done once per session.

Also hosts the acceptance-result registry: the acceptance tests record one
line per criterion here, and a terminal-summary hook prints the whole table
at the end of the run, whether or not stdout capture is active.
"""

from __future__ import annotations

import pytest

from dnls_profile import asymptotics as asym
from dnls_profile.integrator import solve_amplitude
from dnls_profile.profile_core import InitialData, OdeSide

DEFAULT_INIT = InitialData(0.1, 0.0)
Y_MAX = 200.0


@pytest.fixture(scope="session")
def traj_pos():
    """Positive half-line amplitude solve for (0.1, 0) up to y = 200."""
    return solve_amplitude(DEFAULT_INIT, OdeSide.POSITIVE_Y, y_max=Y_MAX)


@pytest.fixture(scope="session")
def traj_neg():
    """Reflected-equation solve for (0.1, 0) up to y = 200 (covers y < 0)."""
    return solve_amplitude(DEFAULT_INIT, OdeSide.NEGATIVE_Y, y_max=Y_MAX)


@pytest.fixture(scope="session")
def path_pos(traj_pos):
    return asym.to_b_variable(traj_pos, OdeSide.POSITIVE_Y)


@pytest.fixture(scope="session")
def path_neg(traj_neg):
    return asym.to_b_variable(traj_neg, OdeSide.NEGATIVE_Y)


@pytest.fixture(scope="session")
def polar_pos(path_pos):
    return asym.polar_decompose(path_pos)


@pytest.fixture(scope="session")
def polar_neg(path_neg):
    return asym.polar_decompose(path_neg)


@pytest.fixture(scope="session")
def fit_pos(polar_pos):
    return asym.fit_asymptotics(polar_pos)


@pytest.fixture(scope="session")
def fit_neg(polar_neg):
    return asym.fit_asymptotics(polar_neg)


@pytest.fixture(scope="session")
def profile_both(traj_pos, traj_neg):
    """Bilateral complex profile assembled from the session solves."""
    return asym.ComplexProfile(phi0=0.0, positive=traj_pos, negative=traj_neg)


# --- acceptance-result registry -------------------------------------------

ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


def record_criterion(number: int, name: str, ok: bool, detail: str) -> None:
    """Record one acceptance criterion outcome and print its line."""
    ACCEPTANCE_RESULTS.append((number, name, bool(ok), detail))
    status = "PASS" if ok else "FAIL"
    print(f"criterion {number:02d} [{status}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number:02d} [{status}] {name}: {detail}")
    passed = sum(1 for _, _, ok, _ in ACCEPTANCE_RESULTS if ok)
    terminalreporter.write_line(f"{passed}/{len(ACCEPTANCE_RESULTS)} criteria passed")
