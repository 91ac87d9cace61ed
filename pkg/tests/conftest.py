import pytest

from shadowhopf.stationary import Params, build_profile


@pytest.fixture(scope="session")
def params():
    return Params(eps=0.2, tau=6.0)


@pytest.fixture(scope="session")
def profile1():
    return build_profile(0.2, 1, -1)


@pytest.fixture(scope="session")
def profile2():
    return build_profile(0.1, 2, -1)
