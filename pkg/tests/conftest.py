from __future__ import annotations

import numpy as np
import pytest

from nonlocal_vrp.game import VrpParams

# Reference point used throughout: coeff = u_l + u_s + x - y = 0.5, base = 6.25.
REF = VrpParams(s=1.0, l=2.0, u_s=1.0, u_l=1.5, x=1.0, y=3.0)
# Same salaries and incentives with y chosen so that coeff == 2.
REF_COEFF2 = VrpParams(s=1.0, l=2.0, u_s=1.0, u_l=1.5, x=1.0, y=1.5)


def random_valid_params(rng: np.random.Generator) -> VrpParams:
    s = rng.uniform(0.1, 3.0)
    l = s + rng.uniform(0.05, 3.0)
    u_s = (l - s) + rng.uniform(0.0, 2.0)
    u_l = u_s + rng.uniform(0.05, 2.0)
    x = rng.uniform(0.05, 3.0)
    y = x + rng.uniform(0.02, 0.98) * (u_l + u_s)
    return VrpParams(s, l, u_s, u_l, x, y)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_RESULTS: dict[int, tuple[str, str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        detail = "; ".join(str(v) for k, v in report.user_properties if k == "detail")
        _RESULTS[number] = ("PASS" if report.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        status, title, detail = _RESULTS[number]
        line = f"[{status}] {number:>2}. {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
