import numpy as np
import pytest

from covert_mimo.channel_model import ChannelPair, GsvdDecomposition, decompose_gsvd

REF_LAMBDA_B = [0.385, 0.214, 0.172, 0.028]
REF_LAMBDA_0 = 0.05
REF_SIGMA_B2 = 0.0005
REF_SIGMA_W2 = 0.001


def random_pair(rng, n_a=4, n_b=None, n_w=None, sigma_b2=1.0, sigma_w2=1.0):
    n_b = n_a if n_b is None else n_b
    n_w = n_a if n_w is None else n_w
    return ChannelPair(rng.standard_normal((n_b, n_a)), rng.standard_normal((n_w, n_a)), sigma_b2, sigma_w2)


def random_gsvd(rng, n_a=4):
    return decompose_gsvd(random_pair(rng, n_a))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ref_gains():
    return GsvdDecomposition.from_gains(REF_LAMBDA_B, [REF_LAMBDA_0] * 4)


@pytest.fixture
def siso():
    return GsvdDecomposition.from_gains([1.0], [1.0])
