import numpy as np
import pytest

from voinfo import hull_reduce, quadratic_scoring_body

from helpers import TABLE1


@pytest.fixture
def table1():
    return hull_reduce(TABLE1)


@pytest.fixture
def scoring():
    return quadratic_scoring_body()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
