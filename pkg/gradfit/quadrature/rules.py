"""Symmetric quadrature rules on the reference triangle and the unit interval."""

from dataclasses import dataclass
from functools import lru_cache
from math import ceil, sqrt

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from gradfit.constants import (
    BARYCENTRIC_MERGE_DECIMALS,
    MAX_EDGE_RULE_DEGREE,
    MAX_TRIANGLE_RULE_DEGREE,
)
from gradfit.exceptions import UnsupportedRuleError


@dataclass(frozen=True)
class QuadRule:
    """
    Quadrature rule in barycentric coordinates.

    ``points`` has shape (n, 3) on triangles and (n, 2) on edges; ``weights``
    sum to one, so integrals are ``measure * weights @ f(points)``.
    """

    points: np.ndarray
    weights: np.ndarray
    exact_degree: int

    @property
    def dim(self) -> int:
        return self.points.shape[1] - 1

    def __len__(self) -> int:
        return len(self.weights)


def _freeze(points: np.ndarray, weights: np.ndarray, degree: int) -> QuadRule:
    points = np.ascontiguousarray(points, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadRule(points, weights, degree)


def _orbit3(a: float):
    """The three permutations of (a, a, 1 - 2a)."""
    b = 1.0 - 2.0 * a
    return [(b, a, a), (a, b, a), (a, a, b)]


def _tabulated(degree: int):
    """Closed-form symmetric rules for low degrees, or None."""
    if degree == 1:
        return np.array([[1 / 3, 1 / 3, 1 / 3]]), np.array([1.0]), 1
    if degree == 2:
        return np.array(_orbit3(1 / 6)), np.full(3, 1 / 3), 2
    if degree in (3, 4):
        # Dunavant, 6 points
        points = _orbit3(0.445948490915965) + _orbit3(0.091576213509771)
        weights = [0.223381589678011] * 3 + [0.109951743655322] * 3
        return np.array(points), np.array(weights), 4
    if degree == 5:
        # Radon, 7 points
        r15 = sqrt(15.0)
        points = [(1 / 3, 1 / 3, 1 / 3)] + _orbit3((6 - r15) / 21) + _orbit3((6 + r15) / 21)
        weights = [9 / 40] + [(155 - r15) / 1200] * 3 + [(155 + r15) / 1200] * 3
        return np.array(points), np.array(weights), 5
    return None


def _collapsed(degree: int):
    """
    Conical product rule symmetrized over the six vertex permutations.

    Gauss-Jacobi (alpha=1) in the collapsed direction times Gauss-Legendre,
    each with ceil((degree + 1) / 2) points; coincident points are merged.
    """
    n = int(ceil((degree + 1) / 2))
    tj, wj = roots_jacobi(n, 1.0, 0.0)
    tl, wl = roots_legendre(n)
    u = 0.5 * (1.0 + tj)
    v = 0.5 * (1.0 + tl)
    x = np.repeat(u, n)
    y = np.outer(1.0 - u, v).ravel()
    weights = 0.25 * np.outer(wj, wl).ravel()
    bary = np.column_stack((1.0 - x - y, x, y))

    perms = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))
    points = np.vstack([bary[:, p] for p in perms])
    weights = np.tile(weights, len(perms)) / len(perms)

    keys = np.round(points, BARYCENTRIC_MERGE_DECIMALS)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    merged = np.bincount(inverse.ravel(), weights=weights)
    return points[first], merged, 2 * n - 1


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> QuadRule:
    """
    Symmetric rule on the reference triangle exact for polynomials of ``degree``.

    Args:
        degree: Requested exactness, 1..20

    Returns:
        QuadRule with ``exact_degree >= degree``

    Raises:
        UnsupportedRuleError: if the degree is out of range
    """
    if not 1 <= degree <= MAX_TRIANGLE_RULE_DEGREE:
        raise UnsupportedRuleError("triangle", degree, MAX_TRIANGLE_RULE_DEGREE)
    table = _tabulated(degree)
    points, weights, exact = table if table is not None else _collapsed(degree)
    weights = weights / weights.sum()
    return _freeze(points, weights, exact)


@lru_cache(maxsize=None)
def edge_rule(degree: int) -> QuadRule:
    """
    Gauss-Legendre rule on [0, 1] exact for polynomials of ``degree``.

    Points are barycentric pairs (1 - t, t).
    """
    if not 1 <= degree <= MAX_EDGE_RULE_DEGREE:
        raise UnsupportedRuleError("edge", degree, MAX_EDGE_RULE_DEGREE)
    n = int(ceil((degree + 1) / 2))
    nodes, weights = roots_legendre(n)
    t = 0.5 * (1.0 + nodes)
    return _freeze(np.column_stack((1.0 - t, t)), 0.5 * weights, 2 * n - 1)
