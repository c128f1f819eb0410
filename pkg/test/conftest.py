import os

import numpy as np
import pytest

from shrinkprior.modules.minimax import named_prior

DATA = os.path.join(os.path.dirname(__file__), "data")


def load_table(name):
    """Reference table as (header, rows); values were read off published curves for p = 10."""
    path = os.path.join(DATA, name)
    with open(path) as handle:
        header = handle.readline().strip().split(",")
    return header, np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


@pytest.fixture
def prior1():
    return named_prior("prior1", 10)


@pytest.fixture
def prior2():
    return named_prior("prior2", 10)


@pytest.fixture
def half_cauchy():
    return named_prior("half_cauchy", 10)


@pytest.fixture
def rng():
    return np.random.default_rng(20221018)
