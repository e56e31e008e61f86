import numpy as np
import pytest

from fracgrad.data import synth_dataset
from fracgrad.functions import make_test_functions


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def catalog():
    return make_test_functions()


@pytest.fixture(scope="session")
def small_dataset():
    # 40 samples keeps network tests well under a second each
    return synth_dataset(40, seed=0)
