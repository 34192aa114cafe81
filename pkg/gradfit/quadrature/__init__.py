"""Quadrature rules and integration helpers."""

from gradfit.quadrature.integrate import (
    PhysicalQuadrature,
    contains_point,
    edge_quadrature,
    element_quadrature,
    graded_quadrature,
    integrate_edge,
    integrate_triangle,
    physical_quadrature,
)
from gradfit.quadrature.rules import QuadRule, edge_rule, triangle_rule

__all__ = [
    "PhysicalQuadrature",
    "QuadRule",
    "contains_point",
    "edge_quadrature",
    "edge_rule",
    "element_quadrature",
    "graded_quadrature",
    "integrate_edge",
    "integrate_triangle",
    "physical_quadrature",
    "triangle_rule",
]
