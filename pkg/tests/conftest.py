import numpy as np
import pytest
from hypothesis import settings

from unsharp.observables import Povm
from unsharp.rng import substream

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def povm_example1():
    """Three-outcome qutrit observable whose first two outcomes merge into a projector."""
    return Povm([np.diag([0.5, 0.25, 0]), np.diag([0.5, 0.75, 0]), np.diag([0, 0, 1.0])])


def povm_example2_b():
    return Povm([np.diag([1.0, 0, 0]), np.diag([0, 1.0, 0]), np.diag([0, 0, 1.0])])


def povm_w():
    return Povm([np.diag([0.8, 0.3]), np.diag([0.2, 0.7])])


def povm_qutrit_two_outcome():
    """Unsharp qutrit observable with e = 0 (two outcomes, three dimensions)."""
    return Povm([np.diag([1.0, 0.5, 0]), np.diag([0, 0.5, 1.0])])


def povm_four_outcome_counterexample():
    """Qubit POVM whose instrument-independent measure drops under white noise."""
    p0 = np.diag([1.0, 0.0])
    p1 = np.diag([0.0, 1.0])
    return Povm([p0, p1 / 3, p1 / 3, p1 / 3])


@pytest.fixture
def example1():
    return povm_example1()


@pytest.fixture
def w_povm():
    return povm_w()


@pytest.fixture
def rng():
    return substream(12345, 0)


# One line per acceptance criterion, filled in by tests/test_acceptance.py.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
