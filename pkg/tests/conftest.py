import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from eggdb.fitdata import Dataset


@pytest.fixture
def small_dataset() -> Dataset:
    rng = np.random.default_rng(7)
    X = np.abs(rng.normal(1.0, 0.5, size=(60, 5))) + 0.1
    y = 2.0 * np.sqrt(X[:, 0]) + 3.0 * X[:, 4]
    return Dataset(X, y)


@pytest.fixture
def linear_dataset() -> Dataset:
    rng = np.random.default_rng(3)
    X = rng.uniform(-2.0, 2.0, size=(80, 2))
    y = 2.0 * X[:, 0] + 5.0
    return Dataset(X, y)
