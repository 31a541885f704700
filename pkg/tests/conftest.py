import pytest

from abm_options import MarketState

_ACCEPTANCE_LINES = []


@pytest.fixture
def benchmark_market():
    """S = 5, r = 5%, sigma_s = 3, half a year: the positive-strike figure setting."""
    return MarketState.from_tau(spot=5.0, rate=0.05, sigma_s=3.0, tau=0.5)


@pytest.fixture
def criterion():
    """Record a pass/fail line for the acceptance summary, then assert."""

    def record(name, ok, detail):
        _ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        assert ok, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
