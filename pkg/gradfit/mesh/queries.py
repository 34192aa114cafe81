"""Adjacency, star and shape queries on active elements."""

from collections import defaultdict
from typing import Dict, List, Set, Union

import numpy as np

from gradfit.exceptions import PointOutsideDomainError
from gradfit.mesh import geometry
from gradfit.mesh.core import FaceKey, Mesh
from gradfit.mesh.geometry import ShapeMetrics

PointLike = Union[int, np.integer, tuple, list, np.ndarray]


def locate(mesh: Mesh, point) -> Set[int]:
    """All active elements whose closure contains ``point``."""
    ids, tris = mesh.active_geometry()
    bary = geometry.batch_barycentric(tris, point)
    inside = (bary >= -geometry.barycentric_tolerance(tris)[:, None]).all(axis=1)
    return {int(eid) for eid in ids[inside]}


def star(mesh: Mesh, z: PointLike) -> Set[int]:
    """
    Elements of the star around a vertex id or a point.

    Args:
        mesh: Conforming mesh
        z: Vertex id, or a point given by its coordinates

    Returns:
        Ids of the active elements containing z
    """
    if isinstance(z, (int, np.integer)):
        elements = mesh.vertex_elements(int(z))
    else:
        elements = locate(mesh, z)
    if not elements:
        raise PointOutsideDomainError(mesh.vertex(int(z)) if isinstance(z, (int, np.integer)) else z)
    return elements


def patch(mesh: Mesh, element_id: int) -> Set[int]:
    """Active elements touching ``element_id`` (itself included)."""
    elements = set()
    for vid in mesh.element(element_id).vertex_ids:
        elements |= mesh.vertex_elements(vid)
    return elements


def _faces_through(mesh: Mesh, element_id: int, z: PointLike) -> List[FaceKey]:
    faces = mesh.element(element_id).edges()
    if isinstance(z, (int, np.integer)):
        return [face for face in faces if int(z) in face]
    return [face for face in faces
            if geometry.point_on_segment(z, mesh.vertex(face.a), mesh.vertex(face.b))]


def is_star_face_connected(mesh: Mesh, z: PointLike) -> bool:
    """
    True iff the elements around z are linked through full edges containing z.

    Two elements of the star are adjacent when they share an edge that passes
    through z; the star is face-connected when this graph is connected.
    """
    elements = sorted(star(mesh, z))
    if len(elements) <= 1:
        return True
    by_face: Dict[FaceKey, List[int]] = defaultdict(list)
    for eid in elements:
        for face in _faces_through(mesh, eid, z):
            by_face[face].append(eid)
    adjacency: Dict[int, Set[int]] = defaultdict(set)
    for owners in by_face.values():
        for eid in owners:
            adjacency[eid].update(owners)

    seen = {elements[0]}
    stack = [elements[0]]
    while stack:
        for nxt in adjacency[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == len(elements)


def shape_metrics(mesh: Mesh, element_id: int) -> ShapeMetrics:
    """(h_K, rho_K, sigma_K) of an element."""
    return geometry.shape_metrics(mesh.geometry(element_id))


def max_shape_coefficient(mesh: Mesh) -> float:
    _, tris = mesh.active_geometry()
    return max(geometry.shape_metrics(tri).sigma for tri in tris)


def star_count(mesh: Mesh) -> int:
    """N_M: the largest number of active elements sharing a vertex."""
    return max(len(mesh.vertex_elements(vid)) for vid in range(mesh.n_vertices))


def boundary_vertices(mesh: Mesh) -> Set[int]:
    vertices = set()
    for face in mesh.boundary_faces():
        vertices.update(face)
    return vertices
