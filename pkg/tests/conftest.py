import numpy as np
import pytest

from hopfion.grid import box, torus


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def t16():
    return torus(16)


@pytest.fixture(scope="session")
def t32():
    return torus(32)


@pytest.fixture(scope="session")
def b32():
    return box(32, R=4.0)


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record callable(number, ok, detail) for the acceptance summary."""
    def record(number, ok, detail):
        _ACCEPTANCE[number] = (ok, detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
