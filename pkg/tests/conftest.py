import numpy as np
import pytest

from phykey.antenna import omni_profile, synthesize_rotated_beam
from phykey.config import config_from_mapping
from phykey.geometry import Topology

PAPER_TOPOLOGY = dict(
    alice=(5.0, 0.0),
    bob=(15.0, 0.0),
    mallory=(10.0, 5.0 * np.sqrt(3.0)),
    scatterers=((8.2, 3.7), (13.5, 6.1)),
)


@pytest.fixture(scope="session")
def topology():
    return Topology(**PAPER_TOPOLOGY)


@pytest.fixture(scope="session")
def beam_profile():
    return synthesize_rotated_beam(mode_count=360, front_to_back_db=20.0)


@pytest.fixture(scope="session")
def oa_profile():
    return omni_profile()


def make_config(**overrides):
    base = {"seed": 1234}
    base.update(overrides)
    return config_from_mapping(base)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
