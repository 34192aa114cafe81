"""Nodal Lagrange bases in barycentric monomial form."""

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np

from gradfit.constants import MAX_POLY_DEGREE, MIN_POLY_DEGREE
from gradfit.exceptions import SingularSystemError, UnsupportedDegreeError
from gradfit.mesh import geometry

MultiIndex = Tuple[int, ...]


def check_degree(degree: int):
    if not MIN_POLY_DEGREE <= degree <= MAX_POLY_DEGREE:
        raise UnsupportedDegreeError(degree, MIN_POLY_DEGREE, MAX_POLY_DEGREE)


@lru_cache(maxsize=None)
def multi_indices(degree: int, dim: int) -> Tuple[MultiIndex, ...]:
    """
    All alpha in N_0^(dim+1) with |alpha| = degree, in decreasing lexicographic order.

    For degree 1 this is the vertex order.
    """
    if dim == 0:
        return ((degree,),)
    result = []
    for first in range(degree, -1, -1):
        for rest in multi_indices(degree - first, dim - 1):
            result.append((first,) + rest)
    return tuple(result)


def _monomials(exponents: np.ndarray, bary: np.ndarray) -> np.ndarray:
    return np.prod(bary[:, None, :] ** exponents[None, :, :], axis=2)


@dataclass(frozen=True)
class ShapeBasis:
    """
    Lagrange basis of degree ``degree`` on a ``dim``-simplex.

    Basis function i is ``sum_b coefficients[i, b] * lambda**exponents[b]``,
    where lambda are barycentric coordinates.
    """

    degree: int
    dim: int
    nodes: Tuple[MultiIndex, ...]
    exponents: np.ndarray
    coefficients: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)

    def values(self, bary: np.ndarray) -> np.ndarray:
        """Basis values at barycentric points (n, dim+1); shape (n, nbasis)."""
        bary = np.atleast_2d(np.asarray(bary, dtype=float))
        return _monomials(self.exponents, bary) @ self.coefficients.T

    def bary_derivatives(self, bary: np.ndarray) -> np.ndarray:
        """Derivatives with respect to each barycentric coordinate; shape (n, nbasis, dim+1)."""
        bary = np.atleast_2d(np.asarray(bary, dtype=float))
        out = np.empty((bary.shape[0], len(self.nodes), self.dim + 1))
        for j in range(self.dim + 1):
            shifted = self.exponents.copy()
            shifted[:, j] = np.maximum(shifted[:, j] - 1, 0)
            mono = _monomials(shifted, bary) * self.exponents[None, :, j]
            out[:, :, j] = mono @ self.coefficients.T
        return out

    def gradients(self, bary: np.ndarray, bary_grads: np.ndarray) -> np.ndarray:
        """Physical gradients (n, nbasis, 2) given the barycentric gradients (dim+1, 2)."""
        return self.bary_derivatives(bary) @ bary_grads


@lru_cache(maxsize=None)
def lagrange_basis(degree: int, dim: int = 2) -> ShapeBasis:
    """
    Nodal basis of P_degree on a triangle (dim=2) or an edge (dim=1).

    Solves the Vandermonde system once; the result is cached and read-only.
    """
    check_degree(degree)
    nodes = multi_indices(degree, dim)
    exponents = np.array(nodes, dtype=int)
    node_bary = exponents / degree
    vandermonde = _monomials(exponents, node_bary)
    try:
        coefficients = np.linalg.inv(vandermonde).T
    except np.linalg.LinAlgError as e:
        raise SingularSystemError("Vandermonde", str(e))
    exponents.setflags(write=False)
    coefficients.setflags(write=False)
    return ShapeBasis(degree, dim, nodes, exponents, coefficients)


def eval_basis(basis: ShapeBasis, bary: np.ndarray) -> np.ndarray:
    return basis.values(bary)


def eval_basis_gradient(basis: ShapeBasis, tri: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Physical gradients of all basis functions at physical points of triangle ``tri``."""
    bary = geometry.barycentric_coordinates(tri, points)
    return basis.gradients(bary, geometry.barycentric_gradients(tri))


@dataclass(frozen=True)
class LagrangeNode:
    multi_index: MultiIndex
    location: Tuple[float, float]


def canonical_location(terms: Sequence[Tuple[int, Sequence[float]]], degree: int) -> Tuple[float, float]:
    """
    (1/degree) * sum(alpha_i * a_i) summed in a fixed order.

    Terms with alpha_i = 0 are dropped and the rest are added in sorted
    coordinate order, so a node on a shared edge gets bit-identical
    coordinates from both neighbouring elements.
    """
    scaled = sorted(
        ((alpha / degree) * float(p[0]), (alpha / degree) * float(p[1]))
        for alpha, p in terms if alpha
    )
    x = 0.0
    y = 0.0
    for px, py in scaled:
        x += px
        y += py
    return x, y


def lagrange_nodes(degree: int, simplex: np.ndarray) -> List[LagrangeNode]:
    """
    Lagrange nodes of a triangle (3, 2) or an edge (2, 2).

    Returns:
        Nodes in the order of ``lagrange_basis(degree, dim).nodes``
    """
    check_degree(degree)
    simplex = np.asarray(simplex, dtype=float)
    dim = simplex.shape[0] - 1
    return [
        LagrangeNode(alpha, canonical_location(zip(alpha, simplex), degree))
        for alpha in multi_indices(degree, dim)
    ]


class ElementPolynomial:
    """A polynomial on one triangle given by nodal coefficients."""

    def __init__(self, tri: np.ndarray, degree: int, coefficients: np.ndarray):
        self.tri = np.asarray(tri, dtype=float)
        self.basis = lagrange_basis(degree)
        self.coefficients = np.asarray(coefficients, dtype=float)
        self._bary_grads = geometry.barycentric_gradients(self.tri)

    def value(self, points: np.ndarray) -> np.ndarray:
        bary = geometry.barycentric_coordinates(self.tri, points)
        return self.basis.values(bary) @ self.coefficients

    def gradient(self, points: np.ndarray) -> np.ndarray:
        bary = geometry.barycentric_coordinates(self.tri, points)
        return np.einsum("nbd,b->nd", self.basis.gradients(bary, self._bary_grads), self.coefficients)
