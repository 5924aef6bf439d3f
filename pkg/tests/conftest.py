import numpy as np
import pytest

from vanhove.grid import AxisSpec, product_grid


def gl_grid(lower=0.0, upper=10.0, n=64, atom=None):
    return product_grid([AxisSpec.continuous(lower, upper, n, atom=atom)])


@pytest.fixture
def grid64():
    return gl_grid(n=64)


@pytest.fixture
def grid128():
    return gl_grid(n=128)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def gaussian(x, center=5.0, width=1.0):
    return np.exp(-((x - center) ** 2) / (2 * width**2))


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion, then assert it."""
    def record(number, title, passed, detail):
        line = f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
