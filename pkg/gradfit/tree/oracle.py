"""Best broken error over bisection subtrees and the near-best comparison."""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from gradfit.approx.diagnostics import STATUS_MEMBER, classify_ratio
from gradfit.approx.local import ErrorFunctional
from gradfit.approx.ritz import ritz_projection
from gradfit.approx.space import build_space
from gradfit.approx.target import TargetFunction
from gradfit.constants import BC_NEUMANN, SIGMA_PRIME_ENUMERATE_LIMIT, SIGMA_PRIME_MAX_BISECTIONS
from gradfit.exceptions import BudgetError, EnumerationBudgetError, InvalidParameterError
from gradfit.logger import get_logger
from gradfit.mesh.core import Mesh
from gradfit.tree.algorithm import tree_threshold
from gradfit.tree.report import CompletionRecord, completion_overhead, completion_record

logger = get_logger()

STRATEGY_ENUMERATE = "enumerate"
STRATEGY_DYNAMIC = "dynamic"
STRATEGY_AUTO = "auto"
STRATEGIES = (STRATEGY_AUTO, STRATEGY_ENUMERATE, STRATEGY_DYNAMIC)

Path = Tuple[int, str]


@dataclass
class SigmaPrimeResult:
    """sigma'(v, N): the smallest broken error over subtrees with at most N leaves."""

    budget: int
    value: float
    leaves: Tuple[Path, ...]
    strategy: str
    candidates: int = 0

    @property
    def leaf_count(self) -> int:
        return len(self.leaves)


class _Forest:
    """Lazily bisected copy of the initial mesh with cached eps per node."""

    def __init__(self, mesh: Mesh, functional: ErrorFunctional):
        self.mesh = mesh.copy()
        self.functional = functional
        self.roots = tuple(self.mesh.active_ids())
        self._eps: Dict[int, float] = {}

    def children(self, eid: int) -> Tuple[int, int]:
        existing = self.mesh.elements[eid].children
        return existing if existing is not None else self.mesh.bisect(eid)

    def eps(self, eid: int) -> float:
        value = self._eps.get(eid)
        if value is None:
            value = self._eps[eid] = self.functional(self.mesh, eid)
        return value

    def paths(self, leaves) -> Tuple[Path, ...]:
        return tuple(sorted(self.mesh.element_path(eid) for eid in leaves))


def _enumerate(forest: _Forest, bisections: int) -> Tuple[float, FrozenSet[int], int]:
    start = frozenset(forest.roots)
    best = (math.fsum(forest.eps(e) for e in start), forest.paths(start), start)
    seen = {start}
    frontier = [start]
    for _ in range(bisections):
        grown = []
        for leaves in frontier:
            for leaf in sorted(leaves):
                candidate = (leaves - {leaf}) | frozenset(forest.children(leaf))
                if candidate in seen:
                    continue
                seen.add(candidate)
                grown.append(candidate)
                value = math.fsum(forest.eps(e) for e in candidate)
                if value < best[0] or (value == best[0] and forest.paths(candidate) < best[1]):
                    best = (value, forest.paths(candidate), candidate)
        frontier = grown
    return best[0], best[2], len(seen)


def _dynamic(forest: _Forest, bisections: int) -> Tuple[float, FrozenSet[int], int]:
    @lru_cache(maxsize=None)
    def subtree(eid: int, budget: int) -> Tuple[float, FrozenSet[int]]:
        best = (forest.eps(eid), frozenset((eid,)))
        if budget == 0 or best[0] == 0.0:
            return best
        first, second = forest.children(eid)
        for b1 in range(budget):
            v1, l1 = subtree(first, b1)
            v2, l2 = subtree(second, budget - 1 - b1)
            if v1 + v2 < best[0]:
                best = (v1 + v2, l1 | l2)
        return best

    # knapsack over the roots
    table: List[Tuple[float, FrozenSet[int]]] = [(0.0, frozenset())] * (bisections + 1)
    for root in forest.roots:
        merged = []
        for total in range(bisections + 1):
            best = None
            for b in range(total + 1):
                v_root, l_root = subtree(root, b)
                v_rest, l_rest = table[total - b]
                if best is None or v_root + v_rest < best[0]:
                    best = (v_root + v_rest, l_root | l_rest)
            merged.append(best)
        table = merged
    value, leaves = table[bisections]
    return math.fsum(forest.eps(e) for e in leaves), leaves, subtree.cache_info().currsize


def sigma_prime(v: TargetFunction, mesh: Mesh, degree: int, budget: int,
                strategy: str = STRATEGY_AUTO,
                functional: Optional[ErrorFunctional] = None) -> SigmaPrimeResult:
    """
    sigma'(v, N) over all bisection subtrees of ``mesh`` with at most N leaves.

    Subtrees need not be conforming. ``enumerate`` visits every canonical
    leaf set; ``dynamic`` solves the same minimization by a recursion over
    the forest. ``auto`` enumerates up to a few bisections only.

    Raises:
        BudgetError: if ``budget`` is below the size of ``mesh``
        EnumerationBudgetError: if more than the allowed number of bisections is requested
    """
    if strategy not in STRATEGIES:
        raise InvalidParameterError("strategy", strategy, f"one of {', '.join(STRATEGIES)}")
    if budget < mesh.n_active:
        raise BudgetError(budget, mesh.n_active)
    bisections = budget - mesh.n_active
    if bisections > SIGMA_PRIME_MAX_BISECTIONS:
        raise EnumerationBudgetError(bisections, SIGMA_PRIME_MAX_BISECTIONS)
    if strategy == STRATEGY_AUTO:
        strategy = STRATEGY_ENUMERATE if bisections <= SIGMA_PRIME_ENUMERATE_LIMIT else STRATEGY_DYNAMIC

    forest = _Forest(mesh, functional or ErrorFunctional(v, degree))
    search = _enumerate if strategy == STRATEGY_ENUMERATE else _dynamic
    value, leaves, candidates = search(forest, bisections)
    logger.debug(f"sigma'({budget}) by {strategy}: {math.sqrt(value):.6e} ({candidates} candidates)")
    return SigmaPrimeResult(budget, math.sqrt(max(value, 0.0)), forest.paths(leaves), strategy, candidates)


STATUS_EXACT = "exact"


@dataclass
class NearBestRow:
    """
    One threshold of the near-best comparison.

    ``E`` is E(v, S(M_t)), which also realizes sigma(v, N) at N = #M_t.
    """

    threshold: float
    elements: int
    leaves: int
    E: float
    sigma_prime: float
    ratio: float
    status: str
    completion_ratio: Optional[float]


@dataclass
class NearBestReport:
    rows: List[NearBestRow] = field(default_factory=list)
    completions: List[CompletionRecord] = field(default_factory=list)

    @property
    def realized_c1(self) -> Optional[float]:
        ratios = [r.ratio for r in self.rows if r.status != STATUS_EXACT]
        return max(ratios) if ratios else None

    @property
    def completion_overhead(self) -> Optional[float]:
        if not any(r.ratio is not None for r in self.completions):
            return None
        return completion_overhead(self.completions)


def near_best_report(v: TargetFunction, mesh: Mesh, degree: int, thresholds: Sequence[float],
                     bc: str = BC_NEUMANN, strategy: str = STRATEGY_AUTO,
                     functional: Optional[ErrorFunctional] = None) -> NearBestReport:
    """
    Compare the threshold algorithm against the sigma' oracle.

    For every threshold t the output mesh M_t is measured by E(v, S(M_t))
    and compared with sigma'(v, #M_t); the realized constant is their ratio.

    Raises:
        EnumerationBudgetError: if some M_t is too large for the oracle
    """
    functional = functional or ErrorFunctional(v, degree)
    report = NearBestReport()
    for threshold in thresholds:
        refined, tree = tree_threshold(v, mesh, degree, threshold, functional)
        ritz = ritz_projection(v, build_space(refined, degree, bc), functional.rule)
        oracle = sigma_prime(v, mesh, degree, refined.n_active, strategy, functional)
        ratio, status = classify_ratio(ritz.E, oracle.value, math.sqrt(ritz.v_energy))
        if status == STATUS_MEMBER:
            status = STATUS_EXACT
        record = completion_record(tree, refined)
        report.completions.append(record)
        report.rows.append(NearBestRow(
            threshold, refined.n_active, tree.leaf_count, ritz.E, oracle.value, ratio, status,
            record.ratio,
        ))
        logger.debug(f"t={threshold:.3e}: E={ritz.E:.6e}, sigma'={oracle.value:.6e}, ratio={ratio:.4g}")
    return report
