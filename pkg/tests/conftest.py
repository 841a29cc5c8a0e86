import numpy as np
import pytest

from magedge.bands import BandStructure
from magedge.potential import FourierPotential


@pytest.fixture(scope="session")
def cosine():
    return FourierPotential.cosine(0.4)


@pytest.fixture(scope="session")
def flat():
    return FourierPotential(1.0)


@pytest.fixture(scope="session")
def bands_b2(cosine):
    return BandStructure(cosine, 2.0, size=96, n_bands=6)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
