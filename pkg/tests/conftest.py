from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def synthetic_csv():
    return DATA_DIR / "synthetic_3000.csv"


@pytest.fixture(scope="session")
def trend_csv():
    return DATA_DIR / "trend.csv"


# One line per acceptance criterion, echoed after the run even when output is captured.
_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    def record(criterion: str, ok: bool, detail: str) -> None:
        _ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")

    return record


def skip_acceptance(criterion: str, reason: str) -> None:
    _ACCEPTANCE_LINES.append(f"[SKIP] {criterion}: {reason}")
    pytest.skip(reason)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
