"""Elementary triangle geometry on (3, 2) coordinate arrays."""

from typing import NamedTuple

import numpy as np

from gradfit.constants import GEOMETRY_TOL


class ShapeMetrics(NamedTuple):
    """Diameter, incircle diameter and shape coefficient of a triangle."""

    h: float
    rho: float
    sigma: float


def signed_area(tri: np.ndarray) -> float:
    """Signed area, positive for counter-clockwise vertex order."""
    (x0, y0), (x1, y1), (x2, y2) = tri
    return 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))


def area(tri: np.ndarray) -> float:
    return abs(signed_area(tri))


def edge_lengths(tri: np.ndarray) -> np.ndarray:
    """Lengths of the edges opposite vertex 0, 1 and 2."""
    tri = np.asarray(tri, dtype=float)
    return np.array([
        np.hypot(*(tri[2] - tri[1])),
        np.hypot(*(tri[0] - tri[2])),
        np.hypot(*(tri[1] - tri[0])),
    ])


def diameter(tri: np.ndarray) -> float:
    return float(edge_lengths(tri).max())


def shape_metrics(tri: np.ndarray) -> ShapeMetrics:
    """
    Compute h_K, rho_K and sigma_K = h_K / rho_K.

    rho_K is the incircle diameter 4|K| / perimeter. A degenerate triangle
    gets sigma = inf.
    """
    lengths = edge_lengths(tri)
    h = float(lengths.max())
    rho = 4.0 * area(tri) / float(lengths.sum())
    sigma = h / rho if rho > 0.0 else float("inf")
    return ShapeMetrics(h, rho, sigma)


def barycentric_gradients(tri: np.ndarray) -> np.ndarray:
    """
    Gradients of the three barycentric coordinates.

    Returns:
        Array of shape (3, 2); row i is grad(lambda_i)
    """
    tri = np.asarray(tri, dtype=float)
    jac = np.column_stack((tri[1] - tri[0], tri[2] - tri[0]))
    inv = np.linalg.inv(jac)
    grads = np.empty((3, 2))
    grads[1] = inv[0]
    grads[2] = inv[1]
    grads[0] = -inv[0] - inv[1]
    return grads


def to_physical(tri: np.ndarray, bary: np.ndarray) -> np.ndarray:
    """Map barycentric coordinates of shape (n, 3) to physical points (n, 2)."""
    return np.asarray(bary, dtype=float) @ np.asarray(tri, dtype=float)


def barycentric_coordinates(tri: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of points (n, 2) with respect to ``tri``."""
    tri = np.asarray(tri, dtype=float)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    jac = np.column_stack((tri[1] - tri[0], tri[2] - tri[0]))
    local = np.linalg.solve(jac, (points - tri[0]).T).T
    return np.column_stack((1.0 - local.sum(axis=1), local))


def batch_barycentric(tris: np.ndarray, point: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of one point with respect to many triangles (m, 3, 2)."""
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    p = np.asarray(point, dtype=float)
    det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1])
    l1 = ((p[0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (p[1] - a[:, 1])) / det
    l2 = ((b[:, 0] - a[:, 0]) * (p[1] - a[:, 1]) - (p[0] - a[:, 0]) * (b[:, 1] - a[:, 1])) / det
    return np.column_stack((1.0 - l1 - l2, l1, l2))


def barycentric_tolerance(tris: np.ndarray) -> np.ndarray:
    """Per-element slack on barycentric coordinates, GEOMETRY_TOL scaled by max|x| / h_K."""
    tris = np.asarray(tris, dtype=float).reshape(-1, 3, 2)
    h = np.linalg.norm(tris - np.roll(tris, 1, axis=1), axis=2).max(axis=1)
    reach = np.abs(tris).max(axis=(1, 2))
    return GEOMETRY_TOL * np.maximum(1.0, reach / h)


def point_on_segment(point, start, end, tol: float = GEOMETRY_TOL) -> bool:
    """True if ``point`` lies on the closed segment [start, end]."""
    p = np.asarray(point, dtype=float)
    a = np.asarray(start, dtype=float)
    d = np.asarray(end, dtype=float) - a
    length2 = float(d @ d)
    offset = p - a
    cross = d[0] * offset[1] - d[1] * offset[0]
    if abs(cross) > tol * length2:
        return False
    t = float(offset @ d) / length2
    return -tol <= t <= 1.0 + tol


def strictly_inside_segment(points: np.ndarray, start, end,
                            tol: float = GEOMETRY_TOL) -> np.ndarray:
    """Mask of points lying in the open segment (start, end)."""
    a = np.asarray(start, dtype=float)
    d = np.asarray(end, dtype=float) - a
    length2 = float(d @ d)
    offset = np.atleast_2d(points) - a
    cross = d[0] * offset[:, 1] - d[1] * offset[:, 0]
    t = offset @ d / length2
    return (np.abs(cross) <= tol * length2) & (t > tol) & (t < 1.0 - tol)
