import numpy as np
import pytest
from hypothesis import settings

from jinxin.flux import burgers, euler, euler_state, linear
from jinxin.waves.ansatz import build_ansatz
from jinxin.waves.fan import build_fan

settings.register_profile("default", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("default")

REST = euler_state(1.0, 0.0, 1.0)  # (1, 0, 2.5)


@pytest.fixture(scope="session")
def euler_model():
    return euler(1.4)


@pytest.fixture(scope="session")
def burgers_model():
    return burgers()


@pytest.fixture(scope="session")
def swap_model():
    return linear([[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture(scope="session")
def euler_fan(euler_model):
    """Shock-contact-shock fan of strengths 0.05 anchored at the rest state."""
    return build_fan(euler_model, REST, [0.05] * 3, p=2)


@pytest.fixture(scope="session")
def euler_ansatz(euler_model, euler_fan):
    return build_ansatz(euler_model, 2.0, euler_fan)


# -- acceptance summary ---------------------------------------------------------
_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance():
    """Record of criterion number -> (passed, detail), printed at the end of the run."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
