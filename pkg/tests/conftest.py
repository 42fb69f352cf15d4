import sys

import numpy as np
import pytest
from hypothesis import settings

from beltrami.grid import make_disk

settings.register_profile("beltrami", deadline=None, max_examples=40)
settings.load_profile("beltrami")


@pytest.fixture(scope="session")
def d64():
    return make_disk(0, 1, 64)


@pytest.fixture(scope="session")
def d128():
    return make_disk(0, 1, 128)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)



def pytest_terminal_summary(terminalreporter):
    # test_acceptance records one line per criterion it ran
    mod = next((m for name, m in list(sys.modules.items())
                if name.rsplit(".", 1)[-1] == "test_acceptance" and hasattr(m, "LINES")), None)
    if mod is None or not mod.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.LINES):
        terminalreporter.write_line(mod.LINES[n])
