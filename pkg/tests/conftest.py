import numpy as np
import pytest

from diraclab import build_clifford


@pytest.fixture(scope="session")
def reps():
    """Clifford data for the dimensions the suites sweep over."""
    return {n: build_clifford(n) for n in range(1, 5)}


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
