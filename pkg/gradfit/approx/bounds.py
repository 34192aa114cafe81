"""Poincare and trace constants, and the local decoupling constant delta_K."""

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy.special import jn_zeros

from gradfit.approx.space import FeSpace
from gradfit.constants import ZERO_MEAN_RTOL
from gradfit.exceptions import InvalidParameterError, NonZeroMeanError, StarConnectivityError
from gradfit.mesh import geometry
from gradfit.mesh.queries import is_star_face_connected, star_count
from gradfit.polynomial import (
    REFERENCE_TRIANGLE,
    ElementPolynomial,
    lagrange_basis,
    reference_node,
    reference_norm_table,
)
from gradfit.quadrature import edge_quadrature, edge_rule, physical_quadrature, triangle_rule


def poincare_trace_constants(d: int = 2) -> Tuple[float, float]:
    """
    (C_P, C_Tr) for d-simplices.

    C_P = 1/j_{1,1} in two dimensions and 1/pi on intervals;
    C_Tr = sqrt(C_P (C_P + 2/d)).
    """
    if d == 2:
        c_p = 1.0 / float(jn_zeros(1, 1)[0])
    elif d == 1:
        c_p = 1.0 / math.pi
    else:
        raise InvalidParameterError("d", d, "1 or 2")
    return c_p, math.sqrt(c_p * (c_p + 2.0 / d))


def bramble_hilbert_constant(s: int, d: int = 2) -> float:
    """s! / (ceil(s/d)!)^d * C_P^(s-1)."""
    if s < 1:
        raise InvalidParameterError("s", s, "an integer >= 1")
    c_p, _ = poincare_trace_constants(d)
    return math.factorial(s) / math.factorial(math.ceil(s / d)) ** d * c_p ** (s - 1)


def trace_inequality_check(w: ElementPolynomial, face: Tuple[int, int]) -> Tuple[float, float]:
    """
    Both sides of ||w||_F <= C_Tr (h_K |F| / |K|)^(1/2) h_K^(1/2) ||grad w||_K.

    Args:
        w: Polynomial on a triangle with zero mean
        face: Local vertex indices of the edge F

    Raises:
        NonZeroMeanError: if the mean of w is not zero
    """
    degree = w.basis.degree
    tri = w.tri
    quad = physical_quadrature(tri, triangle_rule(2 * degree))
    values = w.value(quad.points)
    mean = quad.integrate(values) / quad.weights.sum()
    scale = max(math.sqrt(quad.integrate(values ** 2) / quad.weights.sum()), np.finfo(float).tiny)
    if abs(mean) > ZERO_MEAN_RTOL * scale and abs(mean) > np.finfo(float).eps:
        raise NonZeroMeanError(mean)

    start, end = tri[face[0]], tri[face[1]]
    equad = edge_quadrature(start, end, edge_rule(2 * degree))
    lhs = math.sqrt(max(equad.integrate(w.value(equad.points) ** 2), 0.0))

    grad_sq = quad.integrate((w.gradient(quad.points) ** 2).sum(axis=1))
    h = geometry.diameter(tri)
    area = geometry.area(tri)
    face_length = float(np.hypot(*(end - start)))
    _, c_tr = poincare_trace_constants(2)
    rhs = c_tr * math.sqrt(h * face_length / area) * math.sqrt(h) * math.sqrt(max(grad_sq, 0.0))
    return lhs, rhs


def basis_norms(tri: np.ndarray, degree: int) -> Tuple[np.ndarray, np.ndarray]:
    """(||Phi_z||_K^2, ||grad Phi_z||_K^2) for every local node."""
    basis = lagrange_basis(degree)
    rule = triangle_rule(2 * degree)
    area = geometry.area(tri)
    values = basis.values(rule.points)
    grads = basis.gradients(rule.points, geometry.barycentric_gradients(tri))
    return area * rule.weights @ values ** 2, area * rule.weights @ (grads ** 2).sum(axis=2)


def inverse_estimate_check(tri: np.ndarray, degree: int) -> float:
    """
    Largest ratio of h_K ||grad Phi_z|| / ||Phi_z|| to its shape-regularity bound.

    The bound is diam(T_ref) * sigma_K * ||grad Phi_ref|| / ||Phi_ref|| for the
    reference node of z, so the result never exceeds one.
    """
    tri = np.asarray(tri, dtype=float)
    phi_sq, grad_sq = basis_norms(tri, degree)
    metrics = geometry.shape_metrics(tri)
    table = reference_norm_table(degree)
    ref_diameter = geometry.diameter(REFERENCE_TRIANGLE)
    worst = 0.0
    for i, alpha in enumerate(lagrange_basis(degree).nodes):
        norms = table[reference_node(alpha).multi_index]
        lhs = metrics.h * math.sqrt(grad_sq[i] / phi_sq[i])
        bound = ref_diameter * metrics.sigma * norms.grad_phi / norms.phi
        worst = max(worst, lhs / bound)
    return worst


def node_mu(space: FeSpace, element_id: int, node: int) -> float:
    """mu_z = |K| / h_K^2 * sum over K' in the star of z of h_K'^2 / |K'|."""
    mesh = space.mesh
    total = math.fsum(mesh.diameter(k) ** 2 / mesh.area(k) for k in space.node_elements[node])
    return mesh.area(element_id) / mesh.diameter(element_id) ** 2 * total


def delta_k_bound(space: FeSpace, element_id: int) -> float:
    """
    delta_K from the local decoupling estimate.

    delta_K^2 = 4 d C_Tr sum over constrained nodes z of K of
    d_z^2 mu_z h_K^2 ||grad Phi_z||^2 / ||Phi_z||^2, with d_z = ||Psi_ref|| ||Phi_ref||.

    Raises:
        StarConnectivityError: if the star of a vertex of K is not edge-connected
    """
    mesh = space.mesh
    element = mesh.element(element_id)
    for vid in element.vertex_ids:
        if not is_star_face_connected(mesh, vid):
            raise StarConnectivityError(vid)

    d = 2
    _, c_tr = poincare_trace_constants(d)
    row = space.element_row(element_id)
    phi_sq, grad_sq = basis_norms(mesh.geometry(element_id), space.degree)
    h = mesh.diameter(element_id)
    table = reference_norm_table(space.degree)

    terms = []
    for j, alpha in enumerate(lagrange_basis(space.degree).nodes):
        node = int(space.element_nodes[row, j])
        if not space.constrained[node]:
            continue
        d_hat = table[reference_node(alpha).multi_index].d_hat
        terms.append(d_hat ** 2 * node_mu(space, element_id, node) * h ** 2 * grad_sq[j] / phi_sq[j])
    return math.sqrt(4 * d * c_tr * math.fsum(terms))


@dataclass
class LocalConstants:
    """Constants of the decoupling estimates for one space."""

    c_p: float
    c_tr: float
    delta: Dict[int, float]
    mu: Dict[Tuple[int, int], float]
    star_count: int

    @property
    def max_delta(self) -> float:
        return max(self.delta.values(), default=0.0)


def local_constants(space: FeSpace) -> LocalConstants:
    c_p, c_tr = poincare_trace_constants(2)
    delta = {int(eid): delta_k_bound(space, int(eid)) for eid in space.element_ids}
    mu = {
        (int(eid), int(node)): node_mu(space, int(eid), int(node))
        for row, eid in enumerate(space.element_ids)
        for node in space.element_nodes[row]
        if space.constrained[node]
    }
    return LocalConstants(c_p, c_tr, delta, mu, star_count(space.mesh))
