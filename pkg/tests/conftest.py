import numpy as np
import pytest

from nomadic import SystemConfig, make_ensemble

# (criterion, passed, detail) lines collected by the acceptance suite
ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def cfg22():
    return SystemConfig.from_db(2, 2, 7.0, 2.0)


@pytest.fixture(scope="session")
def ens22(cfg22):
    return make_ensemble(cfg22, 300, seed=11)


@pytest.fixture(scope="session")
def cfg32():
    return SystemConfig.from_db(3, 2, 10.0, 2.0)


@pytest.fixture(scope="session")
def ens32(cfg32):
    return make_ensemble(cfg32, 150, seed=12)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda x: x[0]):
        terminalreporter.write_line(f"criterion {crit:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
