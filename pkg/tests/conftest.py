import sys
from pathlib import Path

import numpy as np
import pytest

# make the test-support modules (oracles, imagegen) importable
sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240915)


@pytest.fixture
def random_rgb(rng):
    return rng.random((13, 17, 3))


@pytest.fixture
def random_planar(rng):
    return rng.random((12, 15))
