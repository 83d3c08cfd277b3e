import numpy as np
import pytest

from uncdrift.nn import ArchitectureSpec, TrainingSet


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def blobs():
    """Two well separated 2-D Gaussian blobs, 400 points."""
    g = np.random.default_rng(7)
    y = g.integers(0, 2, 400)
    x = g.normal(0, 0.5, (400, 2)) + np.where(y[:, None] == 1, 2.0, -2.0)
    return TrainingSet(x, y)


@pytest.fixture
def small_arch():
    return ArchitectureSpec((16, 8, 4), input_dim=2, num_classes=2, dropout_rate=0.1, epochs=20)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][2:])):
            terminalreporter.write_line(line)
