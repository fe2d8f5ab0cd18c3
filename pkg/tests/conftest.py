import math

import numpy as np
import pytest

from fracexp.expansions import SmoothInput

ALPHAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@pytest.fixture
def quartic():
    return SmoothInput.monomial(4)


@pytest.fixture
def exp2():
    return SmoothInput.exponential(2.0)


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def uniform(n=101, lo=0.0, hi=1.0):
    return np.linspace(lo, hi, n)


GAMMA_15 = math.gamma(1.5)


# one PASS/FAIL line per acceptance criterion, printed after the run
_CRITERIA = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    _CRITERIA[number] = (call.excinfo is None, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, title, detail = _CRITERIA[number]
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
