import numpy as np
import pytest

from quasibr.domains import Disk, Superellipse, regular_polygon
from quasibr.quasinorm import check_compatibility


@pytest.fixture(scope="session")
def disk_pair():
    return check_compatibility(Disk(10.0), np.eye(2))


@pytest.fixture(scope="session")
def disk_aniso_pair():
    return check_compatibility(Disk(10.0), np.diag([1.0, 2.0]))


@pytest.fixture(scope="session")
def superellipse_pair():
    return check_compatibility(Superellipse(10.0, 10.0, 4.0), np.eye(2))


@pytest.fixture(scope="session")
def hexagon_pair():
    return check_compatibility(regular_polygon(6, 12.0, phase=np.pi / 2),
                               np.eye(2))


@pytest.fixture(scope="session")
def all_pairs(disk_pair, disk_aniso_pair, superellipse_pair, hexagon_pair):
    return [("disk-iso", disk_pair), ("disk-aniso", disk_aniso_pair),
            ("superellipse", superellipse_pair), ("hexagon", hexagon_pair)]
