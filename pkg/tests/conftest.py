import numpy as np
import pytest

from hw2f import DiscountCurve, Hw2fParams, SwapSpec, TerminalCovariance


def terminal(a1, a2, T_n, sqrt_xi1, ratio, rho, S=None):
    return Hw2fParams(a1, a2, TerminalCovariance.from_vol_ratio(T_n, sqrt_xi1, ratio, rho), S)


@pytest.fixture
def flat2():
    return DiscountCurve.flat(0.02)


@pytest.fixture
def pillar_curve():
    return DiscountCurve.from_pillars([(0.5, 0.992), (1, 0.983), (2, 0.962), (5, 0.905), (10, 0.80), (30, 0.52)])


@pytest.fixture
def region_ii_pair():
    """a1=0.1, a2=0.01, 2y and 10y swaps fixing at 10y: region II at ratio 0.3."""
    return 10.0, SwapSpec(10.0, 12.0), SwapSpec(10.0, 20.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# ---------------------------------------------------------------- acceptance report

ACCEPTANCE = {}


def record(number, title, ok, detail):
    """Store and print one acceptance verdict; the test asserts ``ok`` afterwards."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
