from functools import lru_cache

import pytest

from osculate.transfer import stationary


@lru_cache(maxsize=None)
def _dist(L):
    return stationary(L)


@pytest.fixture(scope="session")
def dist():
    """Cached exact stationary distributions, keyed by L."""
    return _dist


def pytest_addoption(parser):
    parser.addoption("--run-large", action="store_true", help="also run the L=14 exact check (about a minute)")
