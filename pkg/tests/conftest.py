import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bzdos import reference

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def chain():
    return reference.make_chain(1.0)


@pytest.fixture(scope="session")
def graphene():
    return reference.make_graphene(1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, n, scale=1.0):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (A + A.conj().T) / 2
