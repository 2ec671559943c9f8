from __future__ import annotations

import os

import pytest

from ppshear.grid import GridParams
from ppshear.transform import TransformPlan, make_plan

_PLANS: dict[tuple[int, int, int, str], TransformPlan] = {}
_ACCEPTANCE: list[str] = []


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption("--runslow", action="store_true", default=False, help="run the N=512 slow tests")


def pytest_collection_modifyitems(config: pytest.Config, items: list[pytest.Item]) -> None:
    if config.getoption("--runslow") or os.environ.get("PPSHEAR_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="slow: use --runslow or PPSHEAR_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def plan_for():
    """Cached transform plans keyed by ``(N, R, choice, profile)``."""

    def get(N: int, R: int = 8, choice: int = 1, profile: str = "c1") -> TransformPlan:
        key = (N, R, choice, profile)
        if key not in _PLANS:
            _PLANS[key] = make_plan(GridParams(N, R), choice, profile)
        return _PLANS[key]

    return get


@pytest.fixture
def accept():
    """Record one acceptance line, print it and return the verdict."""

    def record(number: int, name: str, passed: bool, detail: str) -> bool:
        line = f"[{number:2d}] {'PASS' if passed else 'FAIL'} {name}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed

    return record
