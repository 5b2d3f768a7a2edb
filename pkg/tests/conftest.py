import numpy as np
import pytest

from tphcov.spaces import space_params

POINT_SPACES = [
    ("sphere", 1),
    ("sphere", 2),
    ("sphere", 3),
    ("real_projective", 2),
    ("real_projective", 3),
    ("complex_projective", 4),
    ("complex_projective", 6),
    ("quaternion_projective", 8),
]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def s2():
    return space_params("sphere", 2)


@pytest.fixture
def rp2():
    return space_params("real_projective", 2)
