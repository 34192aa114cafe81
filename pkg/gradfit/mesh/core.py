"""Bisection forest of triangles with newest-vertex refinement edges."""

from dataclasses import dataclass, replace
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np

from gradfit.constants import AREA_TOL, GEOMETRY_TOL
from gradfit.exceptions import (
    DegenerateElementError,
    InactiveElementError,
    MeshError,
    NonConformingMeshError,
)
from gradfit.logger import get_logger
from gradfit.mesh import geometry

logger = get_logger()


@dataclass(frozen=True, order=True)
class FaceKey:
    """Edge identified by its two vertex ids, stored in increasing order."""

    a: int
    b: int

    def __post_init__(self):
        if self.a > self.b:
            lo, hi = self.b, self.a
            object.__setattr__(self, "a", lo)
            object.__setattr__(self, "b", hi)

    def __iter__(self) -> Iterator[int]:
        yield self.a
        yield self.b

    def __contains__(self, vertex: int) -> bool:
        return vertex == self.a or vertex == self.b


@dataclass
class Element:
    """
    Node of the bisection forest.

    ``vertex_ids[2]`` is the newest vertex and the refinement edge is
    ``(vertex_ids[0], vertex_ids[1])``.
    """

    vertex_ids: Tuple[int, int, int]
    generation: int = 0
    active: bool = True
    parent: Optional[int] = None
    children: Optional[Tuple[int, int]] = None
    root: int = 0

    @property
    def refinement_edge(self) -> FaceKey:
        return FaceKey(self.vertex_ids[0], self.vertex_ids[1])

    @property
    def newest_vertex(self) -> int:
        return self.vertex_ids[2]

    def edges(self) -> Tuple[FaceKey, FaceKey, FaceKey]:
        v0, v1, v2 = self.vertex_ids
        return FaceKey(v0, v1), FaceKey(v1, v2), FaceKey(v2, v0)


class Checkpoint(NamedTuple):
    """Sizes of the forest at a point it can be rolled back to."""

    n_elements: int
    n_vertices: int
    n_midpoints: int


class Mesh:
    """
    Triangular mesh stored as a bisection forest.

    The active elements (forest leaves) form the current mesh. Adjacency maps
    (edge -> active owners, vertex -> active elements) are kept in sync by
    ``bisect`` and ``rollback``.
    """

    def __init__(self, vertices: Sequence[Tuple[float, float]], elements: List[Element],
                 initial_count: Optional[int] = None):
        self._coords: List[Tuple[float, float]] = [(float(x), float(y)) for x, y in vertices]
        self.elements: List[Element] = elements
        self.initial_count = len(elements) if initial_count is None else initial_count
        self._midpoints: Dict[FaceKey, int] = {}
        self._midpoint_log: List[FaceKey] = []
        self._edge_owners: Dict[FaceKey, Set[int]] = {}
        self._vertex_elements: Dict[int, Set[int]] = {}
        self._coords_cache: Optional[np.ndarray] = None
        self._version = 0
        self._active_cache: Optional[Tuple[int, np.ndarray, np.ndarray]] = None
        self._n_active = 0
        for eid, element in enumerate(self.elements):
            if element.active:
                self._attach(eid)

    # --- basic accessors -------------------------------------------------

    @property
    def vertices(self) -> np.ndarray:
        """Vertex coordinates as a read-only (n, 2) array."""
        if self._coords_cache is None or len(self._coords_cache) != len(self._coords):
            coords = np.array(self._coords, dtype=float).reshape(-1, 2)
            coords.setflags(write=False)
            self._coords_cache = coords
        return self._coords_cache

    @property
    def n_vertices(self) -> int:
        return len(self._coords)

    @property
    def n_active(self) -> int:
        return self._n_active

    @property
    def version(self) -> int:
        """Counter bumped by every mutation."""
        return self._version

    def vertex(self, vid: int) -> Tuple[float, float]:
        return self._coords[vid]

    def element(self, eid: int) -> Element:
        if not 0 <= eid < len(self.elements):
            raise MeshError("Unknown element", f"Element {eid}")
        return self.elements[eid]

    def active_ids(self) -> List[int]:
        return [eid for eid, element in enumerate(self.elements) if element.active]

    def geometry(self, eid: int) -> np.ndarray:
        """Vertex coordinates of an element in its stored order, shape (3, 2)."""
        return np.array([self._coords[v] for v in self.element(eid).vertex_ids])

    def active_geometry(self) -> Tuple[np.ndarray, np.ndarray]:
        """Ids and stacked (m, 3, 2) geometry of all active elements."""
        if self._active_cache is None or self._active_cache[0] != self._version:
            ids = np.array(self.active_ids(), dtype=int)
            coords = np.asarray(self._coords, dtype=float)
            conn = np.array([self.elements[e].vertex_ids for e in ids], dtype=int).reshape(-1, 3)
            self._active_cache = (self._version, ids, coords[conn])
        return self._active_cache[1], self._active_cache[2]

    def area(self, eid: int) -> float:
        return geometry.area(self.geometry(eid))

    def diameter(self, eid: int) -> float:
        return geometry.diameter(self.geometry(eid))

    def domain_area(self) -> float:
        _, tris = self.active_geometry()
        return float(sum(geometry.area(t) for t in tris))

    def edge_owners(self, face: FaceKey) -> Set[int]:
        """Active elements having ``face`` as a full edge."""
        return set(self._edge_owners.get(face, ()))

    def vertex_elements(self, vid: int) -> Set[int]:
        """Active elements having ``vid`` as a vertex."""
        return set(self._vertex_elements.get(vid, ()))

    def active_faces(self) -> List[FaceKey]:
        return sorted(face for face, owners in self._edge_owners.items() if owners)

    def boundary_faces(self) -> List[FaceKey]:
        """Edges owned by exactly one active element (conforming meshes only)."""
        return sorted(face for face, owners in self._edge_owners.items() if len(owners) == 1)

    def midpoint(self, face: FaceKey) -> Optional[int]:
        """Midpoint vertex of ``face`` if that edge has been bisected."""
        return self._midpoints.get(face)

    def has_hanging_edge(self, eid: int) -> bool:
        return any(face in self._midpoints for face in self.element(eid).edges())

    # --- mutation --------------------------------------------------------

    def _attach(self, eid: int):
        element = self.elements[eid]
        self._n_active += 1
        for face in element.edges():
            self._edge_owners.setdefault(face, set()).add(eid)
        for vid in element.vertex_ids:
            self._vertex_elements.setdefault(vid, set()).add(eid)

    def _detach(self, eid: int):
        element = self.elements[eid]
        self._n_active -= 1
        for face in element.edges():
            owners = self._edge_owners[face]
            owners.discard(eid)
            if not owners:
                del self._edge_owners[face]
        for vid in element.vertex_ids:
            self._vertex_elements[vid].discard(eid)

    def _midpoint_vertex(self, face: FaceKey) -> int:
        vid = self._midpoints.get(face)
        if vid is None:
            (xa, ya), (xb, yb) = self._coords[face.a], self._coords[face.b]
            self._coords.append((0.5 * (xa + xb), 0.5 * (ya + yb)))
            vid = len(self._coords) - 1
            self._midpoints[face] = vid
            self._midpoint_log.append(face)
        return vid

    def bisect(self, eid: int) -> Tuple[int, int]:
        """
        Bisect an active element at the midpoint of its refinement edge.

        Children are (v2, v0, m) and (v1, v2, m); both keep the counter-clockwise
        orientation and have the midpoint m as newest vertex.
        """
        element = self.element(eid)
        if not element.active:
            raise InactiveElementError(eid)
        v0, v1, v2 = element.vertex_ids
        m = self._midpoint_vertex(element.refinement_edge)

        self._detach(eid)
        element.active = False
        first = len(self.elements)
        for vertex_ids in ((v2, v0, m), (v1, v2, m)):
            self.elements.append(Element(
                vertex_ids=vertex_ids,
                generation=element.generation + 1,
                parent=eid,
                root=element.root,
            ))
            self._attach(len(self.elements) - 1)
        element.children = (first, first + 1)
        self._version += 1
        return element.children

    def checkpoint(self) -> Checkpoint:
        return Checkpoint(len(self.elements), len(self._coords), len(self._midpoint_log))

    def rollback(self, mark: Checkpoint):
        """Remove every element, vertex and midpoint created after ``mark``."""
        for eid in range(len(self.elements) - 1, mark.n_elements - 1, -1):
            element = self.elements[eid]
            if element.active:
                self._detach(eid)
            parent = self.elements[element.parent]
            if parent.children is not None:
                parent.children = None
                parent.active = True
                self._attach(element.parent)
        del self.elements[mark.n_elements:]
        for face in self._midpoint_log[mark.n_midpoints:]:
            del self._midpoints[face]
        del self._midpoint_log[mark.n_midpoints:]
        del self._coords[mark.n_vertices:]
        self._coords_cache = None
        self._version += 1

    def copy(self) -> "Mesh":
        """Independent copy sharing no mutable state."""
        clone = Mesh.__new__(Mesh)
        clone._coords = list(self._coords)
        clone.elements = [replace(element) for element in self.elements]
        clone.initial_count = self.initial_count
        clone._midpoints = dict(self._midpoints)
        clone._midpoint_log = list(self._midpoint_log)
        clone._edge_owners = {face: set(owners) for face, owners in self._edge_owners.items()}
        clone._vertex_elements = {vid: set(els) for vid, els in self._vertex_elements.items()}
        clone._coords_cache = None
        clone._version = self._version
        clone._active_cache = None
        clone._n_active = self._n_active
        return clone

    def element_path(self, eid: int) -> Tuple[int, str]:
        """Root id and child-index string identifying ``eid`` in the forest."""
        bits = []
        element = self.element(eid)
        while element.parent is not None:
            parent = self.elements[element.parent]
            bits.append("0" if parent.children[0] == eid else "1")
            eid = element.parent
            element = parent
        return eid, "".join(reversed(bits))

    def __repr__(self) -> str:
        return (f"Mesh(vertices={self.n_vertices}, active={self.n_active}, "
                f"forest={len(self.elements)})")


def _refinement_vertex(tri: np.ndarray, vertex_ids: Sequence[int]) -> int:
    """Local index opposite the longest edge; ties go to the smallest vertex id."""
    lengths = geometry.edge_lengths(tri)
    longest = lengths.max()
    candidates = [j for j in range(3) if lengths[j] >= longest * (1.0 - GEOMETRY_TOL)]
    return min(candidates, key=lambda j: vertex_ids[j])


def _check_vertex_conformity(coords: np.ndarray, triangles: np.ndarray):
    used = np.unique(triangles)
    points = coords[used]
    seen = set()
    for index, tri in enumerate(triangles):
        for j in range(3):
            face = FaceKey(int(tri[j]), int(tri[(j + 1) % 3]))
            if face in seen:
                continue
            seen.add(face)
            inside = geometry.strictly_inside_segment(points, coords[face.a], coords[face.b])
            if inside.any():
                raise NonConformingMeshError(index, int(used[np.argmax(inside)]))


def mesh_from_arrays(coords, triangles, refinement: Optional[Sequence[int]] = None) -> Mesh:
    """
    Build a conforming mesh from vertex coordinates and vertex-id triples.

    Args:
        coords: Sequence of 2D points
        triangles: Sequence of vertex-id triples
        refinement: Optional local index (0, 1, 2) per triangle of the vertex
            opposite its refinement edge; defaults to the longest-edge rule

    Returns:
        Mesh whose elements are counter-clockwise with vertex_ids[2] opposite
        the refinement edge
    """
    coords = np.asarray(coords, dtype=float).reshape(-1, 2)
    triangles = np.asarray(triangles, dtype=int).reshape(-1, 3)
    if refinement is not None and len(refinement) != len(triangles):
        raise MeshError("Refinement list does not match the triangles",
                        f"{len(refinement)} entries for {len(triangles)} triangles")

    elements = []
    for index, tri_ids in enumerate(triangles):
        ids = [int(v) for v in tri_ids]
        if min(ids) < 0 or max(ids) >= len(coords):
            raise MeshError("Vertex index out of range", f"Triangle {index}: {ids}")
        if len(set(ids)) != 3:
            raise DegenerateElementError(index, 0.0)
        tri = coords[ids]
        signed = geometry.signed_area(tri)
        if abs(signed) <= AREA_TOL * geometry.diameter(tri) ** 2:
            raise DegenerateElementError(index, abs(signed))
        if refinement is not None:
            r = int(refinement[index])
            if r not in (0, 1, 2):
                raise MeshError("Refinement index must be 0, 1 or 2", f"Triangle {index}: {r}")
            opposite = ids[r]
        else:
            opposite = ids[_refinement_vertex(tri, ids)]
        if signed < 0:
            ids[1], ids[2] = ids[2], ids[1]
        r = ids.index(opposite)
        vertex_ids = (ids[(r + 1) % 3], ids[(r + 2) % 3], ids[r])
        elements.append(Element(vertex_ids=vertex_ids, root=index))

    _check_vertex_conformity(coords, triangles)
    mesh = Mesh([tuple(p) for p in coords], elements)
    logger.debug(f"Built mesh with {mesh.n_vertices} vertices and {len(elements)} elements")
    return mesh
