"""Triangular meshes with newest-vertex bisection."""

from gradfit.mesh.builtin import BUILTIN_MESHES, l_shape, reference_triangle, unit_square
from gradfit.mesh.core import Checkpoint, Element, FaceKey, Mesh, mesh_from_arrays
from gradfit.mesh.geometry import ShapeMetrics
from gradfit.mesh.io import format_mesh, parse_mesh, read_mesh, write_mesh
from gradfit.mesh.queries import (
    boundary_vertices,
    is_star_face_connected,
    locate,
    max_shape_coefficient,
    patch,
    shape_metrics,
    star,
    star_count,
)
from gradfit.mesh.refine import bisect, complete, is_conforming, refine_and_complete, uniform_refine

__all__ = [
    "BUILTIN_MESHES",
    "Checkpoint",
    "Element",
    "FaceKey",
    "Mesh",
    "ShapeMetrics",
    "bisect",
    "boundary_vertices",
    "complete",
    "format_mesh",
    "is_conforming",
    "is_star_face_connected",
    "l_shape",
    "locate",
    "max_shape_coefficient",
    "mesh_from_arrays",
    "parse_mesh",
    "patch",
    "read_mesh",
    "reference_triangle",
    "refine_and_complete",
    "shape_metrics",
    "star",
    "star_count",
    "unit_square",
    "uniform_refine",
    "write_mesh",
]
