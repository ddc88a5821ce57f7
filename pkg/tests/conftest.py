import numpy as np
import pytest

from multisub import CoverageFunction, ModularFunction


@pytest.fixture
def three_sets():
    """Elements covering {1,2,3}, {3,4} and {5}."""
    return CoverageFunction([[1, 2, 3], [3, 4], [5]], universe_size=6)


def random_coverage(n, universe, seed, density=0.25):
    rng = np.random.default_rng(seed)
    cover = rng.random((n, universe)) < density
    return CoverageFunction([np.flatnonzero(r) for r in cover], universe_size=universe)


@pytest.fixture
def modular_521():
    return ModularFunction([5, 1, 1])
