import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from topoclust.network import WeightedNetwork, n_pairs

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


@st.composite
def networks(draw, min_nodes=2, max_nodes=8, nodes=None, elements=finite):
    n = nodes if nodes is not None else draw(st.integers(min_nodes, max_nodes))
    w = draw(arrays(np.float64, n_pairs(n), elements=elements))
    return WeightedNetwork(n, w)


def random_network(rng, n, low=0.0, high=1.0):
    return WeightedNetwork(n, rng.uniform(low, high, n_pairs(n)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
