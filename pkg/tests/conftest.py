import numpy as np
import pytest

from horoflow.manifold import EUCLIDEAN, HYPERBOLIC, ModelSpace, Point


@pytest.fixture
def h2():
    return ModelSpace(HYPERBOLIC, 2)


@pytest.fixture
def h3():
    return ModelSpace(HYPERBOLIC, 3)


@pytest.fixture
def e3():
    return ModelSpace(EUCLIDEAN, 3)


@pytest.fixture
def base3(h3):
    return Point(h3, [0.0, 0.0, 1.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
