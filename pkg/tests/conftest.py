import numpy as np
import pytest

from qrabi.oracle import oracle_statistics
from qrabi.params import RabiParams
from qrabi.solver import solve

VALIDATION_DELTAS = (0.1, 0.5, 1.0, 2.0)
VALIDATION_GS = (0.2, 0.5, 1.0, 2.0, 3.0)
VALIDATION_GRID = [(d, g) for d in VALIDATION_DELTAS for g in VALIDATION_GS]


@pytest.fixture(scope="session")
def oracle_cache():
    cache = {}

    def get(delta, g):
        if (delta, g) not in cache:
            cache[(delta, g)] = oracle_statistics(RabiParams(delta, g))
        return cache[(delta, g)]

    return get


@pytest.fixture(scope="session")
def solve_cache():
    cache = {}

    def get(delta, g):
        if (delta, g) not in cache:
            cache[(delta, g)] = solve(RabiParams(delta, g))
        return cache[(delta, g)]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
