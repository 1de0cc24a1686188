import numpy as np
import pytest

from losrcert import strategies


@pytest.fixture(scope="session")
def ghz():
    return strategies.ghz_behavior()


@pytest.fixture(scope="session")
def box():
    return strategies.ns_box_behavior(exact=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
