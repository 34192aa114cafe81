"""Dual face bases and Scott-Zhang nodal functionals on edges."""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from gradfit.constants import QUAD_DEGREE_MARGIN
from gradfit.exceptions import DegenerateElementError, SingularSystemError
from gradfit.polynomial.basis import check_degree, lagrange_basis
from gradfit.quadrature import QuadRule, edge_quadrature, edge_rule


@lru_cache(maxsize=None)
def _reference_edge_mass(degree: int) -> np.ndarray:
    basis = lagrange_basis(degree, 1)
    rule = edge_rule(2 * degree)
    values = basis.values(rule.points)
    mass = values.T @ (rule.weights[:, None] * values)
    mass.setflags(write=False)
    return mass


@dataclass(frozen=True)
class DualFaceBasis:
    """
    L2(F)-duals of the edge Lagrange basis.

    Row z of ``nodal_values`` holds Psi_z at the edge nodes, ordered as
    ``lagrange_basis(degree, 1).nodes`` relative to the edge orientation.
    """

    degree: int
    length: float
    nodal_values: np.ndarray

    def values(self, bary: np.ndarray) -> np.ndarray:
        """All Psi_z at edge barycentric points (n, 2); shape (n, degree+1)."""
        return lagrange_basis(self.degree, 1).values(bary) @ self.nodal_values.T


def dual_face_basis(degree: int, length: float) -> DualFaceBasis:
    """
    Dual basis on an edge of the given length.

    Obtained from the inverse of the edge mass matrix, so on an edge of
    length L the values scale like 1/L.
    """
    check_degree(degree)
    if not length > 0.0:
        raise DegenerateElementError(-1, 0.0)
    try:
        inverse = np.linalg.inv(_reference_edge_mass(degree))
    except np.linalg.LinAlgError as e:
        raise SingularSystemError("edge mass", str(e))
    return DualFaceBasis(degree, float(length), inverse / length)


def scott_zhang_values(v: Callable[[np.ndarray], np.ndarray], start, end, degree: int,
                       rule: Optional[QuadRule] = None) -> np.ndarray:
    """
    N_{z;F}(v) = int_F v Psi_z for every node z of the edge F = [start, end].

    Args:
        v: Vectorized function of (n, 2) points
        start: First endpoint of F
        end: Second endpoint of F
        degree: Polynomial degree
        rule: Edge rule; defaults to degree 2*degree + margin

    Returns:
        Array of length degree+1 in edge node order
    """
    rule = rule or edge_rule(2 * degree + QUAD_DEGREE_MARGIN)
    quad = edge_quadrature(start, end, rule)
    length = float(quad.weights.sum())
    dual = dual_face_basis(degree, length)
    psi = dual.values(rule.points)
    return (quad.weights * v(quad.points)) @ psi


def scott_zhang_value(v: Callable[[np.ndarray], np.ndarray], node_index: int, start, end,
                      degree: int, rule: Optional[QuadRule] = None) -> float:
    """N_{z;F}(v) for the ``node_index``-th Lagrange node of F = [start, end]."""
    return float(scott_zhang_values(v, start, end, degree, rule)[node_index])
