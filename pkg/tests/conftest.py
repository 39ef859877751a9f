import numpy as np
import pytest

from csmirror import validation


@pytest.fixture(scope="session")
def mols():
    return validation.reference_molecules()


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
