import pytest

from nfsums.fieldfile import load_field


@pytest.fixture(scope="session")
def fq():
    return load_field("q")


@pytest.fixture(scope="session")
def fqi():
    return load_field("q_i")


@pytest.fixture(scope="session")
def fsqrt2():
    return load_field("q_sqrt2")


@pytest.fixture(scope="session")
def fm5():
    return load_field("q_sqrt_m5")
