"""Shared fixtures for the gradfit tests."""

import pytest

from gradfit.experiments.registry import get_entry
from gradfit.mesh.builtin import l_shape, reference_triangle, unit_square
from gradfit.mesh.core import mesh_from_arrays


@pytest.fixture
def square():
    """The two-triangle unit square."""
    return unit_square()


@pytest.fixture
def lshape():
    return l_shape()


@pytest.fixture
def ref_mesh():
    """A single reference triangle."""
    return reference_triangle()


@pytest.fixture
def bowtie():
    """Two triangles touching only at the origin."""
    coords = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
    return mesh_from_arrays(coords, [(0, 1, 2), (0, 3, 4)])


@pytest.fixture
def sine():
    return get_entry("sine").target


@pytest.fixture
def x_squared():
    return get_entry("x_squared").target
