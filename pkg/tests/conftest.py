import numpy as np
import pytest

from givetake import BetaOneZ, ChainSpec, Linear


@pytest.fixture
def identity_p():
    """p(x) = x."""
    return Linear(1.0, 1.0)


@pytest.fixture
def uniform_chain(identity_p):
    return ChainSpec(identity_p, BetaOneZ(1.0), BetaOneZ(1.0))


@pytest.fixture
def interior():
    return np.arange(1, 1001) / 1001.0


# criterion number -> (passed, detail); filled by the acceptance tests
ACCEPTANCE = {}


@pytest.fixture
def record_criterion():
    def record(number, passed, detail):
        ACCEPTANCE[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
