"""Reference-element nodes and norm tables."""

from functools import lru_cache
from typing import Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from gradfit.mesh import geometry
from gradfit.polynomial.basis import MultiIndex, check_degree, lagrange_basis, multi_indices
from gradfit.polynomial.dual import dual_face_basis
from gradfit.quadrature import edge_rule, triangle_rule

REFERENCE_TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


class ReferenceNode(NamedTuple):
    """Node of the reference triangle with barycentric coefficients in decreasing order."""

    multi_index: MultiIndex
    point: Tuple[float, float]


class ReferenceNorms(NamedTuple):
    """L2 norms on the reference triangle/edge for one node class."""

    phi: float
    grad_phi: float
    psi: Optional[float]

    @property
    def d_hat(self) -> Optional[float]:
        """||Psi|| * ||Phi||, defined for nodes that lie on an edge."""
        return None if self.psi is None else self.psi * self.phi


def reference_node(multi_index: Sequence[int]) -> ReferenceNode:
    """
    Image of a node on the reference triangle.

    The barycentric coefficients are sorted in decreasing order, so the result
    does not depend on how the element's vertices are enumerated.
    """
    alpha = tuple(sorted((int(a) for a in multi_index), reverse=True))
    degree = sum(alpha)
    return ReferenceNode(alpha, (alpha[1] / degree, alpha[2] / degree))


@lru_cache(maxsize=None)
def reference_norm_table(degree: int) -> Dict[MultiIndex, ReferenceNorms]:
    """
    Norms of the reference basis and dual functions, keyed by sorted multi-index.

    ``psi`` is only defined for classes with a zero coefficient (nodes on an
    edge); element-interior nodes never carry a face functional.
    """
    check_degree(degree)
    basis = lagrange_basis(degree)
    rule = triangle_rule(2 * degree)
    ref_area = geometry.area(REFERENCE_TRIANGLE)
    values = basis.values(rule.points)
    grads = basis.gradients(rule.points, geometry.barycentric_gradients(REFERENCE_TRIANGLE))
    phi_sq = ref_area * rule.weights @ values ** 2
    grad_sq = ref_area * rule.weights @ (grads ** 2).sum(axis=2)

    erule = edge_rule(2 * degree)
    psi_values = dual_face_basis(degree, 1.0).values(erule.points)
    psi_sq = erule.weights @ psi_values ** 2
    edge_nodes = multi_indices(degree, 1)

    table = {}
    for i, alpha in enumerate(basis.nodes):
        key = reference_node(alpha).multi_index
        if alpha != key:
            continue
        psi = None
        if key[2] == 0:
            psi = float(np.sqrt(psi_sq[edge_nodes.index(key[:2])]))
        table[key] = ReferenceNorms(float(np.sqrt(phi_sq[i])), float(np.sqrt(grad_sq[i])), psi)
    return table
