import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def e(i, j, d=2):
    E = np.zeros((d, d), dtype=complex)
    E[i, j] = 1
    return E


ACCEPTANCE = {}


def record_criterion(number, passed, detail):
    ACCEPTANCE[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
