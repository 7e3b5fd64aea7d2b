import pytest

from conglab.systems import parse_system

HAUSDORFF = "sets 3\ncong {1} ~ {2}\ncong {2} ~ {3}\ncong {1} ~ {2 3}\n"
ROBINSON = "sets 4\ncong {2} ~ {2 3 4}\ncong {4} ~ {1 2 4}\n"
FIVESET = (
    "sets 5\n"
    "cong {1} ~ {2}\ncong {2} ~ {3}\ncong {3} ~ {4}\ncong {4} ~ {5}\n"
    "cong {1 2} ~ {1 3 4}\n"
)
R2_SWAP = "sets 2\ncong {1} ~ {2}\n"
# consistent but not weak: one free congruence plus one self-complement one
MIXED = "sets 4\ncong {1} ~ {2}\ncong {1 2} ~ {3 4}\n"
DOUBLED = "sets 2\ncong {1} ~ {2}\ncong {2} ~ {1}\n"


@pytest.fixture
def hausdorff():
    return parse_system(HAUSDORFF)


@pytest.fixture
def robinson():
    return parse_system(ROBINSON)


@pytest.fixture
def fiveset():
    return parse_system(FIVESET)


@pytest.fixture
def r2_swap():
    return parse_system(R2_SWAP)


@pytest.fixture
def mixed():
    return parse_system(MIXED)


@pytest.fixture
def doubled():
    return parse_system(DOUBLED)
