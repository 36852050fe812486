import numpy as np
import pytest

from scbf.domain import DomainSpec
from scbf.params import PhysicalParams


@pytest.fixture(scope="session")
def dom2():
    return DomainSpec(2, 32)


@pytest.fixture(scope="session")
def dom2_small():
    return DomainSpec(2, 16)


@pytest.fixture(scope="session")
def dom3():
    return DomainSpec(3, 16)


@pytest.fixture(scope="session")
def params_r3():
    return PhysicalParams(mu=1.0, alpha=1.0, beta=1.0, r=3.0)


@pytest.fixture(autouse=True)
def _no_global_rng_leak():
    # nothing in the library may touch the global numpy RNG
    state = np.random.get_state()
    yield
    after = np.random.get_state()
    assert state[0] == after[0] and np.array_equal(state[1], after[1])
