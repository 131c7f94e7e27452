import pytest

from skipqueue import Constant, Geometric, Sinusoid

ACCEPTANCE_LINES = []


@pytest.fixture
def example1():
    """lambda = 1 + sin 2 pi t, mu = 1 + cos 2 pi t, b_k = 2^-k."""
    return Sinusoid(1.0, 1.0, 0.0, 1.0), Sinusoid(1.0, 0.0, 1.0, 1.0), Geometric(0.5)


@pytest.fixture
def unit_rates():
    return Constant(1.0), Constant(1.0)


@pytest.fixture
def report():
    def _report(criterion, ok, detail):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}")
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
