import numpy as np
import pytest

from convertible.galois import FieldSpec


@pytest.fixture
def gf256():
    return FieldSpec(8, 0x11D)


@pytest.fixture
def gf16():
    return FieldSpec(4, 0x13)


@pytest.fixture
def rng():
    return np.random.default_rng(7)
