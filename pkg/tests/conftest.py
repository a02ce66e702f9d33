import numpy as np
import pytest
from hypothesis import settings

from twodelay import Parameters, find_hopf_hopf
from twodelay.checks import load_golden

# derandomized so that repeated runs are identical
settings.register_profile("repro", derandomize=True, deadline=None, max_examples=60)
settings.load_profile("repro")


@pytest.fixture(scope="session")
def golden():
    return load_golden()


@pytest.fixture(scope="session")
def base():
    return Parameters()


@pytest.fixture(scope="session")
def hh_points(golden, base):
    return {name: find_hopf_hopf(base, g["seed"]) for name, g in golden.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
