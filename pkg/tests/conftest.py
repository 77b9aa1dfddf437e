import numpy as np
import pytest

from heatlab import geometry, spectral


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def straight_curve():
    return geometry.Curve.straight(1.0, 1.0, n=513)


@pytest.fixture(scope="session")
def interval_pair():
    return spectral.dirichlet_ground_state("interval", 128)


@pytest.fixture(scope="session")
def ball_pair():
    return spectral.dirichlet_ground_state("ball", 512)
