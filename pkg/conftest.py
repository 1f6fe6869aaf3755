"""Shared grids and fields for the test modules."""
import numpy as np
import pytest

from fraclab.models.grid import Field, Grid1D


@pytest.fixture
def unit_circle_grid() -> Grid1D:
    """[-pi, pi) with 256 nodes: integer frequencies are resonant."""
    return Grid1D(-np.pi, np.pi, 256)


@pytest.fixture
def box_grid() -> Grid1D:
    return Grid1D(-8.0, 8.0, 256)


@pytest.fixture
def wide_grid() -> Grid1D:
    return Grid1D(-20.0, 20.0, 2048)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def gaussian(grid: Grid1D, width: float = 1.0) -> Field:
    return Field.from_function(grid, lambda x: np.exp(-(x / width) ** 2))
