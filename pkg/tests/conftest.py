import pytest

from hrfna import DEFAULT_CONFIG, DEFAULT_MODULI, DEFAULT_PIPELINE, make_modulus_set


@pytest.fixture(scope="session")
def default_ms():
    return make_modulus_set(DEFAULT_MODULI)


@pytest.fixture(scope="session")
def small_ms():
    return make_modulus_set([3, 5, 7])


@pytest.fixture(scope="session")
def hcfg():
    return DEFAULT_CONFIG


@pytest.fixture(scope="session")
def pcfg():
    return DEFAULT_PIPELINE
