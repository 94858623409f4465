import numpy as np
import pytest

from mac_sav_zec.grid import GridSpec


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=[4, 8, 16])
def grid(request):
    return GridSpec(request.param)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
