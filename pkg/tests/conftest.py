import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from surfspec.geometry import build_standard, lattice_basis

settings.register_profile("surfspec", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("surfspec")


@pytest.fixture(scope="session")
def square_torus():
    return build_standard("flat_torus", 30, basis=2 * np.pi * np.eye(2))


@pytest.fixture(scope="session")
def unit_square_torus():
    return build_standard("flat_torus", 12, basis=np.eye(2))


@pytest.fixture(scope="session")
def equilateral_torus():
    return build_standard("flat_torus", 30, basis=lattice_basis("equilateral", 1.0))


@pytest.fixture(scope="session")
def sphere():
    return build_standard("round_sphere", 8)


@pytest.fixture(scope="session")
def klein_bottle():
    return build_standard("flat_klein_bottle", 12)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(LINES, key=int):
            terminalreporter.write_line(LINES[key])
