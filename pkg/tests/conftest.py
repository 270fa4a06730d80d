import numpy as np
import pytest

from ncerg.algebra import AlgebraContext


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def ctx2():
    return AlgebraContext(2)


@pytest.fixture
def ctx3():
    return AlgebraContext(3)


@pytest.fixture
def ctx4():
    return AlgebraContext(4)


@pytest.fixture
def wctx3():
    return AlgebraContext(3, np.array([0.5, 1.0, 2.5]))
