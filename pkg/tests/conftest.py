import numpy as np
import pytest
from hypothesis import settings

from semilinear_uq.coeff import AffinePotential
from semilinear_uq.solver import ProblemSpec
from semilinear_uq.spatial import Grid

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid100():
    return Grid.from_h(1 / 100)


@pytest.fixture(scope="session")
def sine_spec(grid100):
    pot = AffinePotential.algebraic(1.0, 2.0, 16)
    return ProblemSpec(grid100, pot, 1.0, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
