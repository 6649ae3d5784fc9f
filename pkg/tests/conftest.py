import numpy as np
import pytest

from mtaar import as_tensor
from mtaar.acceptance import example_tensor3


@pytest.fixture
def example3():
    """The 3x3x3 tensor a_ijk = 1 + 3(i-1) + (j-1) + 9(k-1) (1-based)."""
    return as_tensor(example_tensor3())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
