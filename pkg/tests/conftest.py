"""
Shared fixtures: the complete graph K4 as a 3-regular pairing and seeded streams
"""

import pytest

from app.graph import Pairing
from app.rng import make_stream

# clones 3v..3v+2 belong to vertex v; edges 01, 02, 03, 12, 13, 23
K4_MATE = [3, 6, 9, 0, 7, 10, 1, 4, 11, 2, 5, 8]


@pytest.fixture
def k4() -> Pairing:
    return Pairing(4, 3, K4_MATE)


@pytest.fixture
def rng():
    return make_stream(12345)


@pytest.fixture
def make_rng():
    def factory(seed: int, stream_id: int = 0):
        return make_stream(seed, stream_id)
    return factory
