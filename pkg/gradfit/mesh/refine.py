"""Newest-vertex bisection and conformity closure."""

from collections import deque
from typing import Iterable, Optional, Tuple

from gradfit.constants import COMPLETION_CAP_FACTOR, COMPLETION_MIN_CAP
from gradfit.exceptions import CompletionError
from gradfit.logger import get_logger
from gradfit.mesh.core import Mesh

logger = get_logger()


def bisect(mesh: Mesh, element_id: int) -> Tuple[int, int]:
    """
    Bisect one active element; the mesh may become non-conforming.

    Args:
        mesh: Mesh to modify in place
        element_id: Active element to bisect

    Returns:
        Ids of the two children
    """
    return mesh.bisect(element_id)


def is_conforming(mesh: Mesh) -> bool:
    """True iff no active element carries a hanging vertex on one of its edges."""
    return not any(mesh.has_hanging_edge(eid) for eid in mesh.active_ids())


def _completion_cap(mesh: Mesh) -> int:
    return max(COMPLETION_MIN_CAP, COMPLETION_CAP_FACTOR * mesh.n_active)


def _close(mesh: Mesh, queue: deque, cap: int) -> int:
    """Bisect queued elements with hanging edges until none remain."""
    bisections = 0
    while queue:
        eid = queue.popleft()
        element = mesh.elements[eid]
        if not element.active or not mesh.has_hanging_edge(eid):
            continue
        if bisections >= cap:
            raise CompletionError(bisections)
        neighbors = mesh.edge_owners(element.refinement_edge) - {eid}
        queue.extend(mesh.bisect(eid))
        queue.extend(neighbors)
        bisections += 1
    return bisections


def complete(mesh: Mesh, max_bisections: Optional[int] = None) -> Mesh:
    """
    Refine ``mesh`` in place to its smallest conforming refinement.

    Every active element with a hanging vertex on one of its edges is bisected
    until no hanging vertex remains.

    Args:
        mesh: Mesh obtained from an admissible initial mesh by bisections
        max_bisections: Optional cap; defaults to a multiple of the mesh size

    Returns:
        The same mesh object, now conforming
    """
    cap = _completion_cap(mesh) if max_bisections is None else max_bisections
    queue = deque(eid for eid in mesh.active_ids() if mesh.has_hanging_edge(eid))
    bisections = _close(mesh, queue, cap)
    if bisections:
        logger.debug(f"Completion added {bisections} bisections ({mesh.n_active} elements)")
    return mesh


def refine_and_complete(mesh: Mesh, element_ids: Iterable[int]) -> int:
    """
    Bisect the given active elements of a conforming mesh and restore conformity.

    Only the neighbourhood of the new midpoints is visited, so the cost is
    proportional to the number of bisections performed.

    Returns:
        Number of closure bisections beyond the requested ones
    """
    queue = deque()
    for eid in element_ids:
        element = mesh.elements[eid]
        if not element.active:
            continue
        neighbors = mesh.edge_owners(element.refinement_edge) - {eid}
        queue.extend(mesh.bisect(eid))
        queue.extend(neighbors)
    return _close(mesh, queue, _completion_cap(mesh))


def uniform_refine(mesh: Mesh, levels: int = 1) -> Mesh:
    """Bisect every active element ``levels`` times, completing after each sweep."""
    for _ in range(levels):
        for eid in mesh.active_ids():
            mesh.bisect(eid)
        complete(mesh)
    return mesh
