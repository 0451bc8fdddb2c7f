import numpy as np
import pytest

from parsweep.core import TridiagMatrix

# one line per acceptance criterion, filled in by test_acceptance
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def lap3():
    return TridiagMatrix.constant(3, -1, 2, -1)


@pytest.fixture
def lap7():
    return TridiagMatrix.constant(7, -1, 2, -1)


def rel_err(x, ref):
    """Max-norm error relative to the max-norm of the reference."""
    return float(np.max(np.abs(np.asarray(x) - ref)) / max(np.max(np.abs(ref)), 1e-300))
