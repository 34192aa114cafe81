"""Completion overhead measurements and run log records."""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

import numpy as np

from gradfit.exceptions import InsufficientRunsError, InvalidParameterError
from gradfit.logger import get_logger
from gradfit.mesh.core import Mesh
from gradfit.mesh.refine import complete
from gradfit.tree.algorithm import ApproxTree

logger = get_logger()


@dataclass(frozen=True)
class CompletionRecord:
    """Sizes of the initial mesh, a refinement M' and complete(M')."""

    initial: int
    leaves: int
    completed: int

    @property
    def ratio(self) -> Optional[float]:
        """(#complete(M') - #M0) / (#M' - #M0), or None when M' = M0."""
        if self.leaves == self.initial:
            return None
        return (self.completed - self.initial) / (self.leaves - self.initial)


def completion_record(tree: ApproxTree, mesh: Mesh) -> CompletionRecord:
    return CompletionRecord(tree.initial_count, tree.leaf_count, mesh.n_active)


def completion_overhead(records: Iterable[CompletionRecord]) -> float:
    """
    Fitted completion constant: the largest ratio over the runs.

    Raises:
        InsufficientRunsError: if no run refined anything
    """
    ratios = [r.ratio for r in records if r.ratio is not None]
    if not ratios:
        raise InsufficientRunsError("the completion overhead")
    return max(ratios)


def stress_completion(mesh: Mesh, bisections: int, seed: int = 0) -> CompletionRecord:
    """
    Bisect random leaves without completing, then complete once.

    Args:
        mesh: Conforming initial mesh (left untouched)
        bisections: Number of random leaf bisections
        seed: Seed of the leaf picker
    """
    if bisections < 0:
        raise InvalidParameterError("bisections", bisections, "a non-negative integer")
    rng = np.random.default_rng(seed)
    forest = mesh.copy()
    for _ in range(bisections):
        leaves = forest.active_ids()
        forest.bisect(leaves[int(rng.integers(len(leaves)))])
    leaf_count = forest.n_active
    complete(forest)
    record = CompletionRecord(mesh.n_active, leaf_count, forest.n_active)
    logger.debug(f"Stress completion: {leaf_count} leaves completed to {forest.n_active} elements")
    return record


def step_records(tree: ApproxTree) -> List[Dict]:
    """One record per bisection: step, element, eps, eta, leaf_count."""
    return [
        {
            "step": s.step,
            "element": s.element,
            "eps": s.eps,
            "eta": s.eta,
            "leaf_count": s.leaf_count,
            "broken_error": s.broken_error,
        }
        for s in tree.steps
    ]


def final_record(tree: ApproxTree, E: float, elements: int, sigma_prime: Optional[float] = None,
                 c1: Optional[float] = None) -> Dict:
    return {
        "threshold_or_budget": tree.threshold if tree.threshold is not None else tree.budget,
        "variant": tree.variant,
        "E": E,
        "elements": elements,
        "leaves": tree.leaf_count,
        "sigma_prime": sigma_prime,
        "C1_realized": c1,
    }
