import numpy as np
import pytest

from dynamics.initial import init_random
from topology.builders import build_complete, build_power_law, build_ring
from topology.coupling import from_weights


@pytest.fixture
def ring16():
    return build_ring(16, 2)


@pytest.fixture
def power_law16():
    return build_power_law(16, 1.0)


@pytest.fixture
def complete8():
    return build_complete(8)


@pytest.fixture
def state16():
    return init_random(16, seed=3)


@pytest.fixture
def random_symmetric():
    """Non-circulant symmetric coupling on 7 nodes."""
    rng = np.random.default_rng(11)
    weights = rng.uniform(0.1, 1.0, (7, 7))
    weights = weights + weights.T
    np.fill_diagonal(weights, 0.0)
    return from_weights(weights)


@pytest.fixture
def random_directed():
    """Non-circulant, non-symmetric coupling on 6 nodes."""
    rng = np.random.default_rng(5)
    weights = rng.uniform(0.1, 1.0, (6, 6))
    np.fill_diagonal(weights, 0.0)
    return from_weights(weights)
