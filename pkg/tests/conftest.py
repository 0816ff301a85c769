import numpy as np
import pytest

from synchrocal.refdb import GenReference, LineReference
from synchrocal.simulator import default_line, make_line_scenario, simulate_line

LINE_REF = LineReference("L1", 0.01, 0.10, 0.20, z0=3 * (0.01 + 0.10j), b0=0.12)
GEN_REF = GenReference("G1", 4.0, 0.3, 1.0, 0.05)


def relative_error(estimate, truth) -> np.ndarray:
    estimate, truth = np.asarray(estimate), np.asarray(truth)
    scale = np.where(truth != 0, np.abs(truth), 1.0)
    return np.abs(estimate - truth) / scale


@pytest.fixture(scope="session")
def line_ref():
    return LINE_REF


@pytest.fixture(scope="session")
def gen_ref():
    return GEN_REF


@pytest.fixture(scope="session")
def clean_line():
    truth, measured = simulate_line(make_line_scenario(default_line(), 10, seed=3))
    return default_line(), measured


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line for an acceptance criterion."""

    def record(name: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
