"""Integration over physical triangles and edges, graded near point singularities."""

from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np

from gradfit.constants import GEOMETRY_TOL, SINGULAR_MAX_LEVELS, SINGULAR_RTOL
from gradfit.exceptions import QuadratureConvergenceError
from gradfit.logger import get_logger
from gradfit.mesh import geometry
from gradfit.quadrature.rules import QuadRule

logger = get_logger()

PointFunction = Callable[[np.ndarray], np.ndarray]


class PhysicalQuadrature(NamedTuple):
    """Quadrature points in physical coordinates with weights that include the measure."""

    points: np.ndarray
    weights: np.ndarray
    levels: int = 0

    def integrate(self, values: np.ndarray) -> float:
        return float(self.weights @ values)


def physical_quadrature(tri: np.ndarray, rule: QuadRule) -> PhysicalQuadrature:
    """Affine image of ``rule`` on the triangle ``tri``."""
    tri = np.asarray(tri, dtype=float)
    return PhysicalQuadrature(rule.points @ tri, geometry.area(tri) * rule.weights)


def edge_quadrature(start, end, rule: QuadRule) -> PhysicalQuadrature:
    """Affine image of an edge rule on the segment [start, end]."""
    ends = np.array([start, end], dtype=float)
    length = float(np.hypot(*(ends[1] - ends[0])))
    return PhysicalQuadrature(rule.points @ ends, length * rule.weights)


def _split_at(tri: np.ndarray, hint: np.ndarray) -> List[np.ndarray]:
    """Sub-triangles of ``tri`` that all have ``hint`` as vertex 0."""
    bary = geometry.barycentric_coordinates(tri, hint[None, :])[0]
    h = geometry.diameter(tri)
    for i in range(3):
        if np.hypot(*(tri[i] - hint)) <= GEOMETRY_TOL * h:
            return [np.array([tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]])]
    pieces = []
    for i in range(3):
        if bary[i] > GEOMETRY_TOL:
            pieces.append(np.array([hint, tri[(i + 1) % 3], tri[(i + 2) % 3]]))
    return pieces


def _graded_pieces(tri: np.ndarray, level: int):
    """
    Ring pieces of a triangle graded towards its vertex 0.

    Returns the two triangles of the trapezoid between the corner triangles
    scaled by 2^-level and 2^-(level+1), and the remaining corner triangle.
    """
    a = tri[0]
    scale = 0.5 ** level
    b = a + scale * (tri[1] - a)
    c = a + scale * (tri[2] - a)
    mb = 0.5 * (a + b)
    mc = 0.5 * (a + c)
    return [np.array([mb, b, c]), np.array([mb, c, mc])], np.array([a, mb, mc])


def _stack(parts: Sequence[PhysicalQuadrature], levels: int) -> PhysicalQuadrature:
    return PhysicalQuadrature(
        np.vstack([p.points for p in parts]),
        np.concatenate([p.weights for p in parts]),
        levels,
    )


def graded_quadrature(f: PointFunction, tri: np.ndarray, rule: QuadRule, hint,
                      rtol: float = SINGULAR_RTOL,
                      max_levels: int = SINGULAR_MAX_LEVELS) -> PhysicalQuadrature:
    """
    Composite rule refined geometrically (ratio 1/2) towards ``hint``.

    Levels are added until the integral of ``f`` changes by less than ``rtol``
    relative between two successive levels. The returned points and weights
    can be reused for any integrand with the same singular behaviour.

    Raises:
        QuadratureConvergenceError: if ``max_levels`` is reached first
    """
    tri = np.asarray(tri, dtype=float)
    hint = np.asarray(hint, dtype=float)
    corners = _split_at(tri, hint)

    rings: List[PhysicalQuadrature] = []
    ring_total = 0.0
    previous = None
    change = float("inf")
    for level in range(max_levels + 1):
        tips = []
        for corner in corners:
            ring, tip = _graded_pieces(corner, level)
            for piece in ring:
                q = physical_quadrature(piece, rule)
                ring_total += q.integrate(f(q.points))
                rings.append(q)
            tips.append(physical_quadrature(tip, rule))
        estimate = ring_total + sum(q.integrate(f(q.points)) for q in tips)
        if previous is not None:
            change = abs(estimate - previous) / max(abs(estimate), np.finfo(float).tiny)
            if change <= rtol:
                logger.debug(f"Graded quadrature settled after {level + 1} levels")
                return _stack(rings + tips, level + 1)
        previous = estimate
    raise QuadratureConvergenceError(estimate, max_levels + 1, change)


def contains_point(tri: np.ndarray, point) -> bool:
    bary = geometry.barycentric_coordinates(tri, np.asarray(point, dtype=float)[None, :])[0]
    return bool((bary >= -geometry.barycentric_tolerance(tri)[0]).all())


def element_quadrature(f: PointFunction, tri: np.ndarray, rule: QuadRule,
                       singular_points: Sequence = ()) -> PhysicalQuadrature:
    """Plain affine rule, or a graded rule when a singular point lies in the closed element."""
    for point in singular_points:
        if contains_point(tri, point):
            return graded_quadrature(f, tri, rule, point)
    return physical_quadrature(tri, rule)


def integrate_triangle(f: PointFunction, tri: np.ndarray, rule: QuadRule,
                       singular_hint: Optional[Sequence[float]] = None) -> float:
    """
    Integrate ``f`` over a physical triangle.

    Args:
        f: Vectorized integrand mapping (n, 2) points to (n,) values
        tri: Triangle vertices, shape (3, 2)
        rule: Reference rule
        singular_hint: Optional point where ``f`` may be singular

    Returns:
        The integral value
    """
    hints = () if singular_hint is None else (singular_hint,)
    quad = element_quadrature(f, tri, rule, hints)
    return quad.integrate(f(quad.points))


def integrate_edge(f: PointFunction, start, end, rule: QuadRule) -> float:
    quad = edge_quadrature(start, end, rule)
    return quad.integrate(f(quad.points))
