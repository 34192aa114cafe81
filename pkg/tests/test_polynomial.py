"""Unit tests for Lagrange bases, dual face bases and reference tables."""

import math

import numpy as np
import pytest

from gradfit.exceptions import DegenerateElementError, UnsupportedDegreeError
from gradfit.mesh.geometry import barycentric_gradients
from gradfit.polynomial import (
    ElementPolynomial,
    canonical_location,
    dual_face_basis,
    lagrange_basis,
    lagrange_nodes,
    multi_indices,
    reference_node,
    reference_norm_table,
    scott_zhang_value,
    scott_zhang_values,
)
from gradfit.quadrature import edge_rule

DEGREES = [1, 2, 3, 4]


def random_polynomial(degree: int, seed: int):
    """A vectorized polynomial of total degree ``degree`` with random coefficients."""
    rng = np.random.default_rng(seed)
    terms = [(a, t - a, rng.normal()) for t in range(degree + 1) for a in range(t + 1)]

    def p(points):
        points = np.atleast_2d(points)
        return sum(c * points[:, 0] ** a * points[:, 1] ** b for a, b, c in terms)

    return p


class TestMultiIndices:
    """Test node enumeration."""

    def test_degree_one_is_vertex_order(self):
        """Test linear nodes follow the vertices."""
        assert multi_indices(1, 2) == ((1, 0, 0), (0, 1, 0), (0, 0, 1))

    def test_edge_order_starts_at_first_endpoint(self):
        """Test edge nodes run from the first to the second endpoint."""
        assert multi_indices(2, 1) == ((2, 0), (1, 1), (0, 2))

    @pytest.mark.parametrize("degree", DEGREES)
    def test_node_count(self, degree):
        """Test the number of triangle nodes."""
        assert len(multi_indices(degree, 2)) == (degree + 1) * (degree + 2) // 2


class TestLagrangeBasis:
    """Test the nodal basis."""

    @pytest.mark.parametrize("degree", DEGREES)
    def test_kronecker_property(self, degree):
        """Test basis function i is one at node i and zero at the others."""
        basis = lagrange_basis(degree)
        nodes = np.array(basis.nodes) / degree
        np.testing.assert_allclose(basis.values(nodes), np.eye(len(basis)), atol=1e-12)

    @pytest.mark.parametrize("degree", DEGREES)
    def test_partition_of_unity(self, degree):
        """Test values sum to one and gradients to zero."""
        rng = np.random.default_rng(degree)
        bary = rng.dirichlet(np.ones(3), size=20)
        basis = lagrange_basis(degree)
        tri = np.array([[0.2, 0.1], [1.3, 0.4], [0.5, 1.1]])
        np.testing.assert_allclose(basis.values(bary).sum(axis=1), 1.0, atol=1e-12)
        grads = basis.gradients(bary, barycentric_gradients(tri))
        np.testing.assert_allclose(grads.sum(axis=1), 0.0, atol=1e-10)

    @pytest.mark.parametrize("degree", DEGREES)
    def test_element_polynomial_reproduces_polynomials(self, degree):
        """Test nodal interpolation of a degree-ell polynomial is exact."""
        tri = np.array([[0.2, 0.1], [1.3, 0.4], [0.5, 1.1]])
        p = random_polynomial(degree, seed=degree)
        nodes = np.array([node.location for node in lagrange_nodes(degree, tri)])
        poly = ElementPolynomial(tri, degree, p(nodes))

        rng = np.random.default_rng(7)
        points = rng.dirichlet(np.ones(3), size=15) @ tri
        np.testing.assert_allclose(poly.value(points), p(points), atol=1e-10)

    def test_element_polynomial_gradient(self):
        """Test the gradient of an interpolated quadratic."""
        tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        nodes = np.array([node.location for node in lagrange_nodes(2, tri)])
        poly = ElementPolynomial(tri, 2, nodes[:, 0] ** 2 + 3 * nodes[:, 1])
        points = np.array([[0.2, 0.3], [0.5, 0.1]])
        np.testing.assert_allclose(poly.gradient(points), [[0.4, 3.0], [1.0, 3.0]], atol=1e-12)

    @pytest.mark.parametrize("degree", [0, 5])
    def test_unsupported_degree(self, degree):
        """Test degrees outside 1..4 raise UnsupportedDegreeError."""
        with pytest.raises(UnsupportedDegreeError):
            lagrange_basis(degree)


class TestNodeLocations:
    """Test node coordinates."""

    def test_shared_edge_node_bit_identical(self):
        """Test an edge node gets the same coordinates from either endpoint order."""
        a = (0.1, 0.7)
        b = (0.3, 0.2)
        assert canonical_location([(1, a), (2, b)], 3) == canonical_location([(2, b), (1, a)], 3)

    def test_quadratic_reference_nodes(self):
        """Test quadratic nodes on the reference triangle."""
        tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        locations = [node.location for node in lagrange_nodes(2, tri)]
        assert locations == [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (1.0, 0.0), (0.5, 0.5), (0.0, 1.0)]


class TestDualFaceBasis:
    """Test L2 duals on edges."""

    def test_linear_dual_on_unit_edge(self):
        """Test the linear dual values on an edge of length one."""
        dual = dual_face_basis(1, 1.0)
        np.testing.assert_allclose(dual.nodal_values, [[4.0, -2.0], [-2.0, 4.0]], atol=1e-12)

    def test_dual_scales_with_length(self):
        """Test duals scale like 1/L."""
        dual = dual_face_basis(1, 2.5)
        np.testing.assert_allclose(dual.nodal_values[0], [4.0 / 2.5, -2.0 / 2.5], atol=1e-12)

    @pytest.mark.parametrize("degree", DEGREES)
    def test_biorthogonality(self, degree):
        """Test int_F Psi_z Phi_y = delta_zy on an edge."""
        length = 0.7
        rule = edge_rule(2 * degree)
        psi = dual_face_basis(degree, length).values(rule.points)
        phi = lagrange_basis(degree, 1).values(rule.points)
        gram = length * (rule.weights[:, None] * psi).T @ phi
        np.testing.assert_allclose(gram, np.eye(degree + 1), atol=1e-10)

    def test_zero_length(self):
        """Test a zero-length edge raises DegenerateElementError."""
        with pytest.raises(DegenerateElementError):
            dual_face_basis(1, 0.0)


class TestScottZhang:
    """Test Scott-Zhang nodal functionals."""

    def test_x_squared_first_node(self):
        """Test N_z(x^2) at the first node of the unit edge."""
        value = scott_zhang_value(lambda p: p[:, 0] ** 2, 0, (0.0, 0.0), (1.0, 0.0), 1)
        assert value == pytest.approx(-1.0 / 6.0, abs=1e-14)

    @pytest.mark.parametrize("degree", DEGREES)
    def test_polynomial_reproduction(self, degree):
        """Test N_z(p) = p(z) for p in P_ell on a slanted edge."""
        start, end = (0.3, -0.2), (1.1, 0.9)
        p = random_polynomial(degree, seed=10 + degree)
        values = scott_zhang_values(p, start, end, degree)
        nodes = np.array([node.location for node in lagrange_nodes(degree, np.array([start, end]))])
        np.testing.assert_allclose(values, p(nodes), atol=1e-11)

    def test_constant(self):
        """Test constants are reproduced at every node."""
        values = scott_zhang_values(lambda p: np.full(len(p), 2.5), (0.0, 0.0), (0.0, 3.0), 3)
        np.testing.assert_allclose(values, 2.5, atol=1e-12)


class TestReferenceTables:
    """Test reference nodes and norms."""

    def test_reference_node_sorted(self):
        """Test multi-indices are sorted in decreasing order."""
        assert reference_node((0, 1, 0)) == ((1, 0, 0), (0.0, 0.0))
        node = reference_node((1, 0, 2))
        assert node.multi_index == (2, 1, 0)
        assert node.point == pytest.approx((1 / 3, 0.0))

    def test_linear_norms(self):
        """Test the linear reference norms."""
        norms = reference_norm_table(1)[(1, 0, 0)]
        assert norms.phi == pytest.approx(math.sqrt(1 / 12))
        assert norms.grad_phi == pytest.approx(1.0)
        assert norms.psi == pytest.approx(2.0)
        assert norms.d_hat == pytest.approx(2.0 * math.sqrt(1 / 12))

    @pytest.mark.parametrize("degree,keys", [
        (1, {(1, 0, 0)}),
        (2, {(2, 0, 0), (1, 1, 0)}),
        (3, {(3, 0, 0), (2, 1, 0), (1, 1, 1)}),
        (4, {(4, 0, 0), (3, 1, 0), (2, 2, 0), (2, 1, 1)}),
    ])
    def test_table_keys(self, degree, keys):
        """Test one entry per node class."""
        assert set(reference_norm_table(degree)) == keys

    def test_interior_nodes_have_no_dual(self):
        """Test element-interior classes carry no face norm."""
        norms = reference_norm_table(3)[(1, 1, 1)]
        assert norms.psi is None
        assert norms.d_hat is None
