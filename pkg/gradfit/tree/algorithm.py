"""
Adaptive tree approximation with the harmonic indicator recursion.

Both variants refine a single conforming mesh: bisecting a tree leaf that
completion has not already split calls ``refine_and_complete``, which keeps
the mesh equal to complete(M') for the current leaf set M'.
"""

import copy
import heapq
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from gradfit.approx.local import ErrorFunctional
from gradfit.approx.target import TargetFunction
from gradfit.constants import TREE_DEPTH_CAP
from gradfit.exceptions import (
    BudgetError,
    InvalidParameterError,
    NonConformingMeshError,
    StarConnectivityError,
    TreeDepthError,
)
from gradfit.logger import get_logger
from gradfit.mesh.core import Mesh
from gradfit.mesh.queries import is_star_face_connected
from gradfit.mesh.refine import refine_and_complete

logger = get_logger()

VARIANT_THRESHOLD = "threshold"
VARIANT_BUDGET = "budget"


def harmonic_indicator(eps: float, parent_eta: float) -> float:
    """(eps^-1 + eta^-1)^-1, with zero whenever either argument vanishes."""
    if eps <= 0.0 or parent_eta <= 0.0:
        return 0.0
    return 1.0 / (1.0 / eps + 1.0 / parent_eta)


@dataclass
class TreeNode:
    element: int
    eps: float
    eta: float
    generation: int
    parent: Optional[int] = None
    children: Optional[Tuple[int, int]] = None


@dataclass
class StepRecord:
    """One bisection of the tree loop."""

    step: int
    element: int
    eps: float
    eta: float
    leaf_count: int
    broken_error: float


@dataclass
class ApproxTree:
    """
    Refinement tree over the initial elements.

    ``nodes`` is keyed by element id in the forest of the output mesh and
    ``leaves`` is the (possibly non-conforming) leaf set M'.
    """

    variant: str
    initial_count: int
    threshold: Optional[float] = None
    budget: Optional[int] = None
    nodes: Dict[int, TreeNode] = field(default_factory=dict)
    leaves: set = field(default_factory=set)
    steps: List[StepRecord] = field(default_factory=list)
    truncated: List[int] = field(default_factory=list)
    _running: float = field(default=0.0, repr=False)

    @property
    def leaf_count(self) -> int:
        return len(self.leaves)

    def leaf_sum(self) -> float:
        """Sum of eps over the leaves: the squared broken error of M'."""
        return math.fsum(self.nodes[eid].eps for eid in self.leaves)

    def broken_error(self) -> float:
        return math.sqrt(self.leaf_sum())

    def roots(self) -> List[int]:
        return sorted(eid for eid, node in self.nodes.items() if node.parent is None)

    def depth(self) -> int:
        return max((node.generation for node in self.nodes.values()), default=0)

    def recursion_residual(self) -> float:
        """Largest relative deviation of a stored eta from its defining recursion."""
        worst = 0.0
        for node in self.nodes.values():
            if node.parent is None:
                expected = node.eps
            else:
                expected = harmonic_indicator(node.eps, self.nodes[node.parent].eta)
            scale = max(abs(expected), abs(node.eta))
            if scale > 0.0:
                worst = max(worst, abs(node.eta - expected) / scale)
        return worst

    def add_root(self, element: int, eps: float, generation: int):
        self.nodes[element] = TreeNode(element, eps, eps, generation)
        self.leaves.add(element)
        self._running += eps

    def split(self, element: int, children: Sequence[int], eps: Sequence[float]):
        parent = self.nodes[element]
        parent.children = tuple(children)
        self.leaves.discard(element)
        for child, value in zip(children, eps):
            self.nodes[child] = TreeNode(
                child, value, harmonic_indicator(value, parent.eta),
                parent.generation + 1, parent=element,
            )
            self.leaves.add(child)
        self._running += math.fsum(eps) - parent.eps
        self.steps.append(StepRecord(
            len(self.steps) + 1, element, parent.eps, parent.eta, len(self.leaves),
            math.sqrt(max(self._running, 0.0)),
        ))


def check_initial_mesh(mesh: Mesh):
    """
    Raises:
        NonConformingMeshError: if the mesh has a hanging vertex
        StarConnectivityError: if some vertex star is not edge-connected
    """
    for eid in mesh.active_ids():
        if mesh.has_hanging_edge(eid):
            raise NonConformingMeshError(eid)
    for vid in sorted({v for eid in mesh.active_ids() for v in mesh.element(eid).vertex_ids}):
        if not is_star_face_connected(mesh, vid):
            raise StarConnectivityError(vid)


def _children(mesh: Mesh, element: int) -> Tuple[int, int]:
    """Children of a tree leaf, bisecting and completing when needed."""
    existing = mesh.elements[element].children
    if existing is not None:
        return existing
    extra = refine_and_complete(mesh, [element])
    if extra:
        logger.debug(f"Bisecting element {element} needed {extra} closure bisections")
    return mesh.elements[element].children


def _seed(mesh: Mesh, functional: ErrorFunctional, tree: ApproxTree, workers: Optional[int]):
    ids = mesh.active_ids()
    for eid, eps in zip(ids, functional.many(mesh, ids, workers)):
        tree.add_root(eid, eps, mesh.elements[eid].generation)


def tree_threshold(v: TargetFunction, mesh: Mesh, degree: int, threshold: float,
                   functional: Optional[ErrorFunctional] = None, depth_cap: int = TREE_DEPTH_CAP,
                   workers: Optional[int] = None) -> Tuple[Mesh, ApproxTree]:
    """
    Grow every element whose indicator exceeds ``threshold``.

    Roots start with eta = eps; children get the harmonic indicator of their
    eps and the parent's eta. Leaves with eta <= threshold form M' and the
    returned mesh is complete(M').

    Args:
        v: Target function
        mesh: Conforming initial mesh (left untouched)
        degree: Polynomial degree ell
        threshold: t > 0
        functional: Optional shared error functional cache
        depth_cap: Largest generation an element may reach
        workers: Thread count for the eps evaluations of new children

    Raises:
        InvalidParameterError: if ``threshold`` is not positive
        TreeDepthError: if an element at ``depth_cap`` still exceeds the threshold
    """
    if not threshold > 0.0:
        raise InvalidParameterError("threshold", threshold, "a positive number")
    check_initial_mesh(mesh)
    functional = functional or ErrorFunctional(v, degree)
    work = mesh.copy()
    tree = ApproxTree(VARIANT_THRESHOLD, mesh.n_active, threshold=threshold)
    _seed(work, functional, tree, workers)

    pending = [eid for eid in tree.roots() if tree.nodes[eid].eta > threshold]
    while pending:
        eid = pending.pop()
        node = tree.nodes[eid]
        if node.generation >= depth_cap:
            raise TreeDepthError(depth_cap, eid, partial=(work, tree))
        children = _children(work, eid)
        tree.split(eid, children, functional.many(work, children, workers))
        pending.extend(c for c in reversed(children) if tree.nodes[c].eta > threshold)

    logger.debug(f"Threshold {threshold:.3e}: {tree.leaf_count} leaves, {work.n_active} elements")
    return work, tree


def _greedy(v: TargetFunction, mesh: Mesh, degree: int, budgets: Sequence[int],
            functional: Optional[ErrorFunctional], depth_cap: int,
            workers: Optional[int]) -> Iterator[Tuple[int, Mesh, ApproxTree]]:
    """Single greedy run yielding a snapshot whenever the next budget is exhausted."""
    check_initial_mesh(mesh)
    budgets = sorted(budgets)
    if budgets[0] < mesh.n_active:
        raise BudgetError(budgets[0], mesh.n_active)
    functional = functional or ErrorFunctional(v, degree)
    work = mesh.copy()
    tree = ApproxTree(VARIANT_BUDGET, mesh.n_active)
    _seed(work, functional, tree, workers)
    heap = [(-tree.nodes[eid].eta, eid) for eid in tree.roots()]
    heapq.heapify(heap)

    level = 0
    while level < len(budgets):
        budget = budgets[level]
        if not heap:
            tree.budget = budget
            yield budget, work.copy(), copy.deepcopy(tree)
            level += 1
            continue
        _, eid = heap[0]
        node = tree.nodes[eid]
        if node.generation >= depth_cap:
            heapq.heappop(heap)
            tree.truncated.append(eid)
            logger.warning(f"Depth cap {depth_cap} reached at element {eid}; leaving it unrefined")
            continue

        mark = work.checkpoint()
        children = _children(work, eid)
        if work.n_active > budget:
            work.rollback(mark)
            tree.budget = budget
            yield budget, work.copy(), copy.deepcopy(tree)
            level += 1
            continue

        heapq.heappop(heap)
        tree.split(eid, children, functional.many(work, children, workers))
        for child in children:
            heapq.heappush(heap, (-tree.nodes[child].eta, child))


def tree_budget(v: TargetFunction, mesh: Mesh, degree: int, budget: int,
                functional: Optional[ErrorFunctional] = None, depth_cap: int = TREE_DEPTH_CAP,
                workers: Optional[int] = None) -> Tuple[Mesh, ApproxTree]:
    """
    Bisect the leaf with the largest indicator while the completed mesh fits ``budget``.

    Ties go to the lowest element id. The loop stops at the first bisection
    whose completion would exceed the budget; that trial is rolled back.

    Raises:
        BudgetError: if ``budget`` is below the size of the initial mesh
    """
    _, work, tree = next(_greedy(v, mesh, degree, [budget], functional, depth_cap, workers))
    logger.debug(f"Budget {budget}: {tree.leaf_count} leaves, {work.n_active} elements")
    return work, tree


def tree_budget_schedule(v: TargetFunction, mesh: Mesh, degree: int, budgets: Sequence[int],
                         functional: Optional[ErrorFunctional] = None,
                         depth_cap: int = TREE_DEPTH_CAP,
                         workers: Optional[int] = None) -> List[Tuple[int, Mesh, ApproxTree]]:
    """(budget, mesh, tree) for increasing budgets from one greedy run."""
    return list(_greedy(v, mesh, degree, budgets, functional, depth_cap, workers))
