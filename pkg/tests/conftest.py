import numpy as np
import pytest

from sshkink.lattice import DimerizedParams
from sshkink.solvers import TAIL_REFERENCE_L, solve_kink, solve_periodic_dimerized

# criterion number -> list of (passed, message); filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def ref_params():
    """Infinite-chain proxy for mu = 1."""
    return solve_periodic_dimerized(TAIL_REFERENCE_L, 1.0)


@pytest.fixture(scope="session")
def kink100(ref_params):
    return solve_kink(100, 1.0, params=ref_params)


@pytest.fixture(scope="session")
def textbook():
    return DimerizedParams(1.0, 0.2)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        entries = ACCEPTANCE[k]
        ok = all(p for p, _ in entries)
        detail = "; ".join(m for _, m in entries)
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
