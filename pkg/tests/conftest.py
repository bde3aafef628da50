import os

# the determinism checks compare 1, 4 and 8 workers
os.environ.setdefault("NUMBA_NUM_THREADS", "8")

import pytest  # noqa: E402

from moebius_expsum import build_tables  # noqa: E402
from moebius_expsum.diophantine import alpha_fixed_point, parse_alpha  # noqa: E402

# criterion id -> list of (outcome, detail); filled by test_acceptance
ACCEPTANCE = {}
REPORT = {}


@pytest.fixture(scope="session")
def small_tables():
    return build_tables(100_000)


@pytest.fixture(scope="session")
def mid_tables():
    return build_tables(10**7)


@pytest.fixture(scope="session")
def sqrt2():
    return alpha_fixed_point(parse_alpha("quad:2"))


@pytest.fixture(scope="session")
def golden():
    return alpha_fixed_point(parse_alpha("golden"))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if report.when == "call" or report.outcome != "passed":
        ACCEPTANCE.setdefault(mark.args[0], []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        outcomes = ACCEPTANCE[crit]
        ok = all(o == "passed" for o in outcomes)
        tr.write_line(f"criterion {crit:>2}: {'PASS' if ok else 'FAIL'} ({len(outcomes)} checks)")
    for key, value in REPORT.items():
        tr.write_line(f"{key}: {value}")
