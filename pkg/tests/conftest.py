"""Shared fixtures: small seeded instances reused across the suite."""

import pytest

from planarvd import instances


@pytest.fixture(scope="session")
def small_grid():
    return instances.grid_instance(5, seed=7)


@pytest.fixture(scope="session")
def small_delaunay():
    return instances.delaunay_instance(60, seed=11)


@pytest.fixture(scope="session")
def medium_delaunay():
    return instances.delaunay_instance(150, seed=3)
