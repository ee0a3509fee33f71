"""Shared geometries and fitted models, solved once per session."""

import pytest

from widomlab.fixtures import interval, spiral_arc, two_disks, two_intervals, unit_disk
from widomlab.potential import solve_equilibrium


@pytest.fixture(scope="session")
def disk_set():
    return unit_disk()


@pytest.fixture(scope="session")
def interval_set():
    return interval()


@pytest.fixture(scope="session")
def two_interval_set():
    return two_intervals()


@pytest.fixture(scope="session")
def two_disk_set():
    return two_disks()


@pytest.fixture(scope="session")
def spiral_set():
    return spiral_arc()


@pytest.fixture(scope="session")
def disk_model(disk_set):
    return solve_equilibrium(disk_set, 1024)


@pytest.fixture(scope="session")
def interval_model(interval_set):
    return solve_equilibrium(interval_set, 1024)


@pytest.fixture(scope="session")
def two_interval_model(two_interval_set):
    return solve_equilibrium(two_interval_set, 512)


@pytest.fixture(scope="session")
def two_disk_model(two_disk_set):
    return solve_equilibrium(two_disk_set, 512)


@pytest.fixture(scope="session")
def spiral_model(spiral_set):
    return solve_equilibrium(spiral_set, 1024)
