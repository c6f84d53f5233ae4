import numpy as np
import pytest

from povm_shadows import pauli6_povm, random_povm, tetrahedral_povm


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture(scope="session")
def tetra():
    return tetrahedral_povm()


@pytest.fixture(scope="session")
def pauli6():
    return pauli6_povm()


@pytest.fixture(scope="session")
def ic_povm_suite():
    """The IC POVMs most tests sweep over: canonical + seeded random ones."""
    gen = np.random.default_rng(7)
    return {
        "tetrahedral": tetrahedral_povm(),
        "pauli6": pauli6_povm(),
        "random4": random_povm(4, gen),
        "random6": random_povm(6, gen),
        "random8": random_povm(8, gen),
    }
