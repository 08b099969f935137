import time
from pathlib import Path

import pytest
from hypothesis import strategies as st

from smartpark.formula import Always, And, Atom, Eventually, Implies, Next, Not, Or

DATA = Path(__file__).resolve().parent.parent / "src" / "smartpark" / "data"

UNARY = (Not, Eventually, Always)
BINARY = (And, Or, Implies)


@st.composite
def formulas(draw, max_size=7, names=("a", "b", "c"), with_next=False):
    """Formulas with at most `max_size` nodes over `names`."""
    unary = UNARY + ((Next,) if with_next else ())

    def build(budget):
        if budget <= 2:
            choice = draw(st.integers(0, 1 if budget == 2 else 0))
        else:
            choice = draw(st.integers(0, 2))
        if choice == 0:
            return Atom(draw(st.sampled_from(names)))
        if choice == 1:
            op = draw(st.sampled_from(unary))
            return op(build(budget - 1))
        op = draw(st.sampled_from(BINARY))
        left_budget = draw(st.integers(1, budget - 2))
        return op(build(left_budget), build(budget - 1 - left_budget))

    return build(draw(st.integers(1, max_size)))


@pytest.fixture
def park_topology():
    return DATA / "car_park.topo"


# -- acceptance reporting ---------------------------------------------------
#
# Tests marked ``criterion("...")`` get one PASS/FAIL line each in the
# terminal summary. When the whole test directory runs, the wall-clock
# budget for the suite is checked as well.

SUITE_BUDGET_S = 120.0
_results: dict[str, bool] = {}
_session = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


def pytest_sessionstart(session):
    _session["start"] = time.perf_counter()


def pytest_collection_finish(session):
    files = {Path(str(item.fspath)).name for item in session.items}
    everything = {p.name for p in Path(__file__).parent.glob("test_*.py")}
    _session["full"] = files == everything and not session.config.getoption("keyword") \
        and not session.config.getoption("markexpr")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = f"{marker.args[0]} [{item.name}]"
    if rep.when == "call" or rep.failed:
        _results[name] = _results.get(name, True) and rep.passed


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _session["start"]
    _session["elapsed"] = elapsed
    if _session.get("full") and elapsed > SUITE_BUDGET_S and session.exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name, ok in _results.items():
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
    if _session.get("full"):
        elapsed = _session["elapsed"]
        ok = elapsed <= SUITE_BUDGET_S
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  7 whole suite under {SUITE_BUDGET_S:.0f} s ({elapsed:.1f} s)")
