"""Lagrange bases, dual face bases and reference tables."""

from gradfit.polynomial.basis import (
    ElementPolynomial,
    LagrangeNode,
    ShapeBasis,
    canonical_location,
    check_degree,
    eval_basis,
    eval_basis_gradient,
    lagrange_basis,
    lagrange_nodes,
    multi_indices,
)
from gradfit.polynomial.dual import DualFaceBasis, dual_face_basis, scott_zhang_value, scott_zhang_values
from gradfit.polynomial.reference import (
    REFERENCE_TRIANGLE,
    ReferenceNode,
    ReferenceNorms,
    reference_node,
    reference_norm_table,
)

__all__ = [
    "DualFaceBasis",
    "ElementPolynomial",
    "LagrangeNode",
    "REFERENCE_TRIANGLE",
    "ReferenceNode",
    "ReferenceNorms",
    "ShapeBasis",
    "canonical_location",
    "check_degree",
    "dual_face_basis",
    "eval_basis",
    "eval_basis_gradient",
    "lagrange_basis",
    "lagrange_nodes",
    "multi_indices",
    "reference_node",
    "reference_norm_table",
    "scott_zhang_value",
    "scott_zhang_values",
]
