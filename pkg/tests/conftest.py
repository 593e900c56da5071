import numpy as np
import pytest

from bayesarfima.likelihood import AugmentedSeries
from bayesarfima.process import InnovationSpec, MemoryParams, ProcessParams
from bayesarfima.samplers import ChainState


@pytest.fixture
def rng():
    return np.random.default_rng(20130)


@pytest.fixture
def white_noise(rng):
    return 2.0 + 0.5 * rng.standard_normal(256)


def make_state(x, d=0.0, phi=(), theta=(), mu=None, sigma=1.0, mode="approx", seed=1, prior_only=False,
               innovation=None):
    innovation = (innovation or InnovationSpec()).with_sigma(sigma)
    psi = ProcessParams(np.mean(x) if mu is None else mu, innovation, MemoryParams(d, phi, theta))
    return ChainState(AugmentedSeries(x), psi, mode, np.random.default_rng(seed), prior_only)


@pytest.fixture
def state_factory():
    return make_state
