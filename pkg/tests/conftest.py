import numpy as np
import pytest

from lindfit.spin_algebra import build_pauli_basis


@pytest.fixture(scope="session")
def basis1():
    return build_pauli_basis(1)


@pytest.fixture(scope="session")
def basis2():
    return build_pauli_basis(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
