import math

import numpy as np
import pytest

from cavitywalk.model import CavityScattering, CoinProfile

PI = math.pi
PLUS = (1 / math.sqrt(2), 1 / math.sqrt(2))

# domain-wall configurations (left angles | right angles), units of pi
WALL_CASES = {
    "zero_modes": (-0.25, 0.375, 0.75, -0.625),
    "pi_modes": (-0.75, -0.625, 0.25, 0.375),
    "same_phase": (-0.25, 0.375, 0.25, 0.375),
}


@pytest.fixture(params=sorted(WALL_CASES))
def wall_case(request):
    return request.param, CoinProfile.from_pi(*WALL_CASES[request.param])


@pytest.fixture
def realistic():
    return CavityScattering.realistic()


def random_state(rng, n_sites, origin=0, margin=0):
    a = rng.normal(size=(n_sites, 2)) + 1j * rng.normal(size=(n_sites, 2))
    if margin:
        a[:margin] = 0
        a[-margin:] = 0
    return a / np.linalg.norm(a)


# one PASS/FAIL line per acceptance criterion, printed after the run
_CRITERIA = pytest.StashKey[list]()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    number, label, bound = marker.args
    status = "PASS" if report.passed else "FAIL"
    line = f"criterion {number} {label}: {status} ({report.duration:.2f} s, bound {bound:g} s)"
    item.config.stash.setdefault(_CRITERIA, []).append((number, line))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
