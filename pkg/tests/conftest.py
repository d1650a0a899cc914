import numpy as np
import pytest

from monoloc.arithmetic import GOLDEN, SILVER
from monoloc.potential import OperatorSpec, blend, sawtooth


def make(lam=1.0, x=0.0, alpha=GOLDEN, v=None):
    return OperatorSpec(alpha, float(lam), v or sawtooth(), x)


@pytest.fixture
def golden10():
    return make(10.0)


@pytest.fixture
def golden2():
    return make(2.0)


@pytest.fixture
def silver_blend():
    return make(10.0, alpha=SILVER, v=blend(0.5))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
