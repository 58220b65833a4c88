import numpy as np
import pytest

from gbmsim import Params


@pytest.fixture
def params():
    return Params.delta_dominant()


@pytest.fixture
def params_gamma():
    return Params.gamma_dominant()


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
