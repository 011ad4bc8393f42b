import numpy as np
import pytest

from debyelattice import build_cubic, build_diamond
from debyelattice import dos


@pytest.fixture(scope="session")
def cubic():
    return build_cubic()


@pytest.fixture(scope="session")
def diamond():
    return build_diamond()


@pytest.fixture(scope="session", params=["cubic", "diamond"])
def crystal(request):
    return build_cubic() if request.param == "cubic" else build_diamond()


@pytest.fixture(scope="session")
def cubic_samples_32(cubic):
    return dos.sample_spectrum(cubic, 32)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = next((m for k, m in sys.modules.items() if k.split(".")[-1] == "test_acceptance"), None)
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
