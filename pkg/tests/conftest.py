import numpy as np
import pytest
from hypothesis import settings

from bifree.measure import AtomicMeasure2D

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def three_atom():
    return AtomicMeasure2D.from_angles([0.3, -0.5, 0.9], [0.2, 0.4, -0.7], [0.5, 0.3, 0.2])
