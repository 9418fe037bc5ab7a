import pytest

from src.models.morse import build_category
from src.utils.lattice import build_weights


@pytest.fixture(scope="session")
def w32():
    return build_weights((3, 2))


@pytest.fixture(scope="session")
def w112():
    return build_weights((1, 1, 2))


@pytest.fixture(scope="session")
def w11():
    return build_weights((1, 1))


@pytest.fixture(scope="session")
def cat32(w32):
    return build_category(w32)


@pytest.fixture(scope="session")
def cat112(w112):
    return build_category(w112)
