import numpy as np
import pytest

from cslearn.subspace import Subspace


def span(*cols):
    return Subspace.from_spanning(np.column_stack(cols).astype(float))


def e(i, n=4):
    v = np.zeros(n)
    v[i - 1] = 1.0
    return v


@pytest.fixture
def plane_triple():
    s1 = span(e(1), e(2))
    s2 = span(e(1), e(3))
    s3 = span(e(1) + e(3), e(2) + e(4))
    return s1, s2, s3


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def record(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
