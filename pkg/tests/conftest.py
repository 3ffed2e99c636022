import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import dbs_planner as dp

_acceptance_lines: list[str] = []


def record_acceptance(line: str) -> None:
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def urban_env():
    return dp.ENVIRONMENT_PRESETS["urban"]


@pytest.fixture(scope="session")
def table_repo():
    """Twelve drones, four each at 35, 39, and 43 dBm."""
    return [dp.DroneSpec(f"t{p}", float(p))
            for p in (35, 39, 43) for _ in range(4)]
