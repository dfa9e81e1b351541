import numpy as np
import pytest
from hypothesis import settings

from ratedist.channel import deterministic_channel

settings.register_profile("repo", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("repo")


@pytest.fixture
def d1():
    """Four inputs; Y merges the middle pair, Z splits the alphabet in halves."""
    return deterministic_channel(4, {"Y": (0, 1, 1, 2), "Z": (0, 0, 1, 1)})


@pytest.fixture
def ident2():
    return deterministic_channel(2, {"Y": (0, 1), "Z1": (0, 1), "Z2": (0, 1)})


@pytest.fixture
def quad():
    """Y sees all four inputs, Z1 and Z2 one bit each."""
    return deterministic_channel(4, {"Y": (0, 1, 2, 3), "Z1": (0, 0, 1, 1), "Z2": (0, 1, 0, 1)})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
