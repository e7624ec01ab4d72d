"""Shared fixtures: constructions and exported models are built once
per session because several test modules probe the same objects."""

import numpy as np
import pytest

from jumpgauge.constructions import export_model, get_construction
from jumpgauge.refutation import load_model


@pytest.fixture(scope="session")
def zero_one():
    return get_construction("s1-zero-one")


@pytest.fixture(scope="session")
def idem_comm():
    return get_construction("s1-idem-comm")


@pytest.fixture(scope="session")
def majority():
    return get_construction("s1-majority")


@pytest.fixture(scope="session")
def peano():
    return get_construction("peano-pair", epsilon=0.05, depth_m=8)


@pytest.fixture(scope="session")
def triode():
    return get_construction("triode-lattice")


@pytest.fixture(scope="session")
def peano_model(peano):
    return load_model(export_model(peano, grid_n=256))


@pytest.fixture(scope="session")
def triode_model(triode):
    return load_model(export_model(triode, grid_n=200))


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
