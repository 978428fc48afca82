import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(20260808)))


def make_rng(*entropy):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(entropy))))


@pytest.fixture
def small_channel():
    import uesa

    return uesa.generate_channel(uesa.ChannelParams(16, 4), make_rng(1, 2, 3))
