import numpy as np
import pytest

from fsmac.channels import FsMac, NoiseChain, additive_modq_mac
from fsmac.probcore import Alphabet


@pytest.fixture
def identity_channel():
    """Single-user noiseless bit pipe Y = X1, |S| = 1."""
    kernel = np.zeros((2, 1, 1, 2, 1))
    for x in range(2):
        kernel[x, 0, 0, x, 0] = 1.0
    return FsMac(Alphabet(1), Alphabet(2), Alphabet(1), Alphabet(2), kernel)


@pytest.fixture
def useless_channel():
    """Output independent of both inputs, |S| = 1."""
    kernel = np.zeros((2, 2, 1, 2, 1))
    kernel[:, :, 0, 0, 0] = 0.3
    kernel[:, :, 0, 1, 0] = 0.7
    return FsMac(Alphabet(1), Alphabet(2), Alphabet(2), Alphabet(2), kernel)


@pytest.fixture
def bern01_channel():
    return additive_modq_mac(2, NoiseChain.iid_bernoulli(0.1))


@pytest.fixture
def noiseless_additive():
    return additive_modq_mac(2, NoiseChain.iid_bernoulli(0.0))
