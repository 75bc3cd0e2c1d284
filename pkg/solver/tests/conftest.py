"""Shared fixtures: the built-in reference systems and scratch directories."""

import pytest

from riccati_spectrum.schemas.chain import ChainOptions
from riccati_spectrum.services import reference_systems


@pytest.fixture(scope="session")
def diagonal():
    """H11 = 1, H22 = H33 = -1, h22 = -1 on [0, 1]."""
    return reference_systems.diagonal()


@pytest.fixture(scope="session")
def example8_T1():
    return reference_systems.example8_T1()


@pytest.fixture(scope="session")
def example8(example8_T1):
    return reference_systems.example8(example8_T1)


@pytest.fixture(scope="session")
def example8_frozen(example8_T1):
    return reference_systems.example8_frozen()


@pytest.fixture(scope="session")
def time_dependent():
    return reference_systems.time_dependent()


@pytest.fixture
def loose_zero():
    """Chain options that classify breakpoints within 1e-6 of 0 as landing on it."""
    return ChainOptions().with_slack(1e-6)


@pytest.fixture
def out_dir(tmp_path):
    d = tmp_path / "out"
    d.mkdir()
    return d
