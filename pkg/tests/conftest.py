import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_gray(rng, h, w):
    return rng.integers(0, 256, size=(h, w)).astype(np.float64)


@pytest.fixture
def gray_pair(rng):
    ref = random_gray(rng, 32, 32)
    mod = np.clip(ref + rng.normal(0, 10, size=ref.shape), 0, 255)
    return ref, mod
