"""Continuous Lagrange spaces on conforming meshes."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from gradfit.approx.target import TargetFunction
from gradfit.constants import BC_DIRICHLET0, BC_NEUMANN, GEOMETRY_TOL
from gradfit.exceptions import InvalidParameterError, NonConformingMeshError, PointOutsideDomainError
from gradfit.logger import get_logger
from gradfit.mesh import geometry
from gradfit.mesh.core import FaceKey, Mesh
from gradfit.mesh.refine import is_conforming
from gradfit.polynomial import canonical_location, check_degree, lagrange_basis, multi_indices
from gradfit.quadrature import triangle_rule

logger = get_logger()

# Sorted (vertex id, barycentric weight) pairs with nonzero weight
NodeKey = Tuple[Tuple[int, int], ...]

BOUNDARY_CONDITIONS = (BC_DIRICHLET0, BC_NEUMANN)


def node_key(vertex_ids, alpha) -> NodeKey:
    return tuple(sorted((int(v), int(a)) for v, a in zip(vertex_ids, alpha) if a))


def face_node_keys(face: FaceKey, degree: int) -> List[NodeKey]:
    """Keys of the Lagrange nodes on ``face`` in edge-basis order from face.a to face.b."""
    return [node_key((face.a, face.b), alpha) for alpha in multi_indices(degree, 1)]


@dataclass
class FeSpace:
    """
    S^{ell,0}(M), or its subspace with zero boundary values for ``dirichlet0``.

    Nodes are numbered by first appearance over the sorted active elements.
    ``node_dof`` is -1 for nodes eliminated by the boundary condition.
    """

    mesh: Mesh
    degree: int
    bc: str
    node_keys: List[NodeKey]
    node_coords: np.ndarray
    element_ids: np.ndarray
    element_nodes: np.ndarray
    node_dof: np.ndarray
    constrained: np.ndarray
    on_boundary: np.ndarray
    node_elements: List[List[int]]
    edges: List[FaceKey]
    node_face: Dict[int, FaceKey] = field(default_factory=dict)
    mesh_version: int = 0

    @property
    def n_nodes(self) -> int:
        return len(self.node_keys)

    @property
    def n_dofs(self) -> int:
        return int((self.node_dof >= 0).sum())

    @property
    def n_elements(self) -> int:
        return len(self.element_ids)

    def node_index(self, key: NodeKey) -> int:
        return self._index[key]

    def element_row(self, element_id: int) -> int:
        return self._rows[int(element_id)]

    def __post_init__(self):
        self._index = {key: i for i, key in enumerate(self.node_keys)}
        self._rows = {int(eid): row for row, eid in enumerate(self.element_ids)}

    def expand(self, dof_values: np.ndarray) -> np.ndarray:
        """Node values from dof values; eliminated nodes get zero."""
        values = np.zeros(self.n_nodes)
        mask = self.node_dof >= 0
        values[mask] = dof_values[self.node_dof[mask]]
        return values

    def restrict(self, node_values: np.ndarray) -> np.ndarray:
        mask = self.node_dof >= 0
        out = np.empty(self.n_dofs)
        out[self.node_dof[mask]] = node_values[mask]
        return out

    def node_integrals(self) -> np.ndarray:
        """int_Omega Phi_z for every node."""
        basis = lagrange_basis(self.degree)
        rule = triangle_rule(self.degree)
        reference = rule.weights @ basis.values(rule.points)
        _, tris = self.mesh.active_geometry()
        areas = np.array([geometry.area(t) for t in tris])
        integrals = np.zeros(self.n_nodes)
        np.add.at(integrals, self.element_nodes, areas[:, None] * reference[None, :])
        return integrals


def _vertex_faces(mesh: Mesh, vid: int) -> List[FaceKey]:
    faces = set()
    for eid in mesh.vertex_elements(vid):
        faces.update(face for face in mesh.element(eid).edges() if vid in face)
    return list(faces)


def build_space(mesh: Mesh, degree: int, bc: str = BC_DIRICHLET0) -> FeSpace:
    """
    Number the Lagrange nodes of a conforming mesh and classify them.

    A node is unconstrained iff it lies in exactly one element and is not an
    eliminated boundary node; all other nodes are constrained and get the
    lowest-index edge through them as F_z, boundary edges first for boundary
    nodes.

    Raises:
        NonConformingMeshError: if the mesh has a hanging vertex
        InvalidParameterError: for an unknown boundary condition
    """
    check_degree(degree)
    if bc not in BOUNDARY_CONDITIONS:
        raise InvalidParameterError("bc", bc, " or ".join(BOUNDARY_CONDITIONS))
    if not is_conforming(mesh):
        raise NonConformingMeshError()

    element_ids = np.array(sorted(mesh.active_ids()), dtype=int)
    basis = lagrange_basis(degree)
    boundary_faces = set(mesh.boundary_faces())

    keys: List[NodeKey] = []
    index: Dict[NodeKey, int] = {}
    node_elements: List[List[int]] = []
    element_nodes = np.empty((len(element_ids), len(basis)), dtype=int)
    edges: List[FaceKey] = []
    edge_index: Dict[FaceKey, int] = {}

    for row, eid in enumerate(element_ids):
        element = mesh.element(int(eid))
        for face in element.edges():
            if face not in edge_index:
                edge_index[face] = len(edges)
                edges.append(face)
        for j, alpha in enumerate(basis.nodes):
            key = node_key(element.vertex_ids, alpha)
            i = index.get(key)
            if i is None:
                i = index[key] = len(keys)
                keys.append(key)
                node_elements.append([])
            node_elements[i].append(int(eid))
            element_nodes[row, j] = i

    coords = np.array([
        canonical_location([(alpha, mesh.vertex(v)) for v, alpha in key], degree) for key in keys
    ]).reshape(-1, 2)

    on_boundary = np.zeros(len(keys), dtype=bool)
    for i, key in enumerate(keys):
        if len(key) == 1:
            on_boundary[i] = any(f in boundary_faces for f in _vertex_faces(mesh, key[0][0]))
        elif len(key) == 2:
            on_boundary[i] = FaceKey(key[0][0], key[1][0]) in boundary_faces

    constrained = np.array([
        not (len(node_elements[i]) == 1 and (bc == BC_NEUMANN or not on_boundary[i]))
        for i in range(len(keys))
    ], dtype=bool)

    node_face: Dict[int, FaceKey] = {}
    for i in np.flatnonzero(constrained):
        key = keys[i]
        if len(key) == 1:
            candidates = _vertex_faces(mesh, key[0][0])
        else:
            candidates = [FaceKey(key[0][0], key[1][0])]
        if on_boundary[i]:
            candidates = [f for f in candidates if f in boundary_faces] or candidates
        node_face[int(i)] = min(candidates, key=edge_index.__getitem__)

    node_dof = np.full(len(keys), -1, dtype=int)
    keep = ~on_boundary if bc == BC_DIRICHLET0 else np.ones(len(keys), dtype=bool)
    node_dof[keep] = np.arange(int(keep.sum()))

    space = FeSpace(
        mesh=mesh,
        degree=degree,
        bc=bc,
        node_keys=keys,
        node_coords=coords,
        element_ids=element_ids,
        element_nodes=element_nodes,
        node_dof=node_dof,
        constrained=constrained,
        on_boundary=on_boundary,
        node_elements=node_elements,
        edges=edges,
        node_face=node_face,
        mesh_version=mesh.version,
    )
    logger.debug(f"Built S^{degree} ({bc}): {space.n_nodes} nodes, {space.n_dofs} dofs, "
                 f"{int(constrained.sum())} constrained")
    return space


class FeFunction:
    """A discrete function given by its nodal values on an FeSpace."""

    def __init__(self, space: FeSpace, node_values: np.ndarray, name: str = "V"):
        self.space = space
        self.node_values = np.asarray(node_values, dtype=float)
        self.name = name
        _, self._tris = space.mesh.active_geometry()
        self._basis = lagrange_basis(space.degree)
        self._bary_grads = np.array([geometry.barycentric_gradients(t) for t in self._tris])

    def _locate(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Row of a containing element and barycentric coordinates per point."""
        rows = np.empty(len(points), dtype=int)
        bary = np.empty((len(points), 3))
        for start in range(0, len(points), 256):
            chunk = points[start:start + 256]
            all_bary = np.stack([geometry.barycentric_coordinates(t, chunk) for t in self._tris], axis=1)
            worst = all_bary.min(axis=2)
            best = worst.argmax(axis=1)
            if (worst[np.arange(len(chunk)), best] < -GEOMETRY_TOL * 1e3).any():
                bad = int(np.argmin(worst[np.arange(len(chunk)), best]))
                raise PointOutsideDomainError(tuple(chunk[bad]))
            rows[start:start + len(chunk)] = best
            bary[start:start + len(chunk)] = all_bary[np.arange(len(chunk)), best]
        return rows, bary

    def value(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        rows, bary = self._locate(points)
        phi = self._basis.values(bary)
        coeffs = self.node_values[self.space.element_nodes[rows]]
        return (phi * coeffs).sum(axis=1)

    def gradient(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        rows, bary = self._locate(points)
        dlam = self._basis.bary_derivatives(bary)
        coeffs = self.node_values[self.space.element_nodes[rows]]
        dlam_v = np.einsum("nbk,nb->nk", dlam, coeffs)
        return np.einsum("nk,nkd->nd", dlam_v, self._bary_grads[rows])

    def as_target(self, boundary_zero: Optional[bool] = None) -> TargetFunction:
        """The discrete function as a TargetFunction."""
        if boundary_zero is None:
            boundary_zero = bool(np.all(self.node_values[self.space.on_boundary] == 0.0))
        return TargetFunction(
            name=self.name,
            value=self.value,
            gradient=self.gradient,
            boundary_zero=boundary_zero,
        )
