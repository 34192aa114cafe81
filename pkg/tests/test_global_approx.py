"""Unit tests for Lagrange spaces, the Ritz projection, quasi-interpolation and decoupling diagnostics."""

import math

import numpy as np
import pytest
from scipy.sparse import csr_matrix, diags

from gradfit.approx.bounds import bramble_hilbert_constant
from gradfit.approx.diagnostics import (
    STATUS_FINITE,
    STATUS_INFINITE,
    STATUS_MEMBER,
    apriori_bound,
    bramble_hilbert_ratios,
    classify_ratio,
    coefficient_rows,
    decoupling_ratio,
    diagnostics_record,
    interpolation_error,
    local_error_sum,
    partial_error_sum,
    theoretical_decoupling_constant,
)
from gradfit.approx.interpolant import check_stars, interpolate
from gradfit.approx.local import element_rule
from gradfit.approx.ritz import energy_error, ritz_projection
from gradfit.approx.space import FeFunction, build_space
from gradfit.approx.target import TargetFunction
from gradfit.exceptions import (
    BoundaryConditionError,
    InvalidParameterError,
    MissingDerivativeError,
    NonConformingMeshError,
    SolverConvergenceError,
    StarConnectivityError,
)
from gradfit.experiments.recipes import convergence_order, run_rates
from gradfit.experiments.registry import get_entry
from gradfit.mesh.builtin import l_shape, unit_square
from gradfit.mesh.queries import boundary_vertices
from gradfit.mesh.refine import uniform_refine
from gradfit.quadrature import triangle_rule
from gradfit.state import ExperimentConfig
from gradfit.utils.solvers import pcg


def refined_square(levels: int):
    return uniform_refine(unit_square(), levels)


def constant_target(c: float) -> TargetFunction:
    return TargetFunction("constant", lambda p: np.full(len(p), c), lambda p: np.zeros((len(p), 2)))


CASES = [
    (name, bc, degree, level)
    for name, bc in [("sine", "dirichlet0"), ("sine", "neumann"), ("x_squared", "neumann"),
                     ("poly_bump", "neumann"), ("atan_layer", "neumann")]
    for degree in (1, 2, 3)
    for level in (1, 2)
]


@pytest.fixture(scope="module", params=[1, 2, 3])
def sine_sweep(request):
    """(degree, rates rows) for sine on uniform levels 1 to 6 of the square."""
    config = ExperimentConfig(command="rates", function="sine", degree=request.param,
                              levels=list(range(1, 7))).validate()
    return request.param, run_rates(config)


def laplacian_1d(n: int, neumann: bool = False) -> csr_matrix:
    main = np.full(n, 2.0)
    if neumann:
        main[[0, -1]] = 1.0
    return diags([-np.ones(n - 1), main, -np.ones(n - 1)], [-1, 0, 1], format="csr")


class TestFeSpace:
    """Test node numbering and classification."""

    def test_unit_square_dirichlet_linears(self, square):
        """Test the two-triangle square has no interior dofs for linears."""
        space = build_space(square, 1, "dirichlet0")
        assert space.n_nodes == 4
        assert space.n_dofs == 0

    @pytest.mark.parametrize("degree", [1, 2, 3, 4])
    def test_node_count(self, degree):
        """Test #nodes = V + E(ell-1) + T(ell-1)(ell-2)/2."""
        mesh = refined_square(2)
        space = build_space(mesh, degree, "neumann")
        expected = (mesh.n_vertices + len(space.edges) * (degree - 1)
                    + mesh.n_active * (degree - 1) * (degree - 2) // 2)
        assert space.n_nodes == expected
        assert space.n_dofs == space.n_nodes

    def test_dirichlet_eliminates_boundary_vertices(self):
        """Test dofs = interior vertices for linears with zero boundary values."""
        mesh = refined_square(3)
        space = build_space(mesh, 1, "dirichlet0")
        assert space.n_dofs == mesh.n_vertices - len(boundary_vertices(mesh))
        assert (space.node_dof[space.on_boundary] == -1).all()

    def test_interior_nodes_unconstrained(self):
        """Test element-interior nodes belong to a single element and are free."""
        space = build_space(refined_square(1), 3, "dirichlet0")
        interior = [i for i, key in enumerate(space.node_keys) if len(key) == 3]
        assert len(interior) == space.n_elements
        assert not space.constrained[interior].any()

    def test_shared_vertices_constrained(self, square):
        """Test with neumann only vertices of one element are free."""
        space = build_space(square, 1, "neumann")
        free = {space.node_keys[i][0][0] for i in np.flatnonzero(~space.constrained)}
        assert free == {1, 3}
        for i in np.flatnonzero(space.constrained):
            assert space.node_keys[i][0][0] in space.node_face[int(i)]

    def test_boundary_nodes_use_boundary_faces(self):
        """Test constrained boundary nodes take a boundary edge as F_z."""
        mesh = refined_square(2)
        space = build_space(mesh, 2, "neumann")
        boundary = set(mesh.boundary_faces())
        for i in np.flatnonzero(space.constrained & space.on_boundary):
            assert space.node_face[int(i)] in boundary

    def test_invalid_bc(self, square):
        """Test an unknown boundary condition raises InvalidParameterError."""
        with pytest.raises(InvalidParameterError):
            build_space(square, 1, "robin")

    def test_non_conforming(self, square):
        """Test a hanging vertex raises NonConformingMeshError."""
        square.bisect(0)
        with pytest.raises(NonConformingMeshError):
            build_space(square, 1, "neumann")

    def test_expand_restrict(self):
        """Test restrict undoes expand."""
        space = build_space(refined_square(2), 2, "dirichlet0")
        dofs = np.random.default_rng(0).normal(size=space.n_dofs)
        values = space.expand(dofs)
        assert (values[space.on_boundary] == 0.0).all()
        np.testing.assert_allclose(space.restrict(values), dofs)

    @pytest.mark.parametrize("degree", [1, 2, 3, 4])
    def test_node_integrals_sum_to_area(self, degree):
        """Test the basis integrals add up to |Omega|."""
        space = build_space(l_shape(), degree, "neumann")
        assert space.node_integrals().sum() == pytest.approx(3.0, rel=1e-12)


class TestFeFunction:
    """Test evaluation of discrete functions."""

    def test_affine_function(self):
        """Test nodal interpolation of an affine function is exact."""
        space = build_space(refined_square(1), 2, "neumann")
        f = lambda p: 1.0 + 2.0 * p[:, 0] - 0.5 * p[:, 1]  # noqa: E731
        V = FeFunction(space, f(space.node_coords))

        points = np.random.default_rng(3).uniform(0.01, 0.99, size=(40, 2))
        np.testing.assert_allclose(V.value(points), f(points), atol=1e-12)
        np.testing.assert_allclose(V.gradient(points), np.tile([2.0, -0.5], (40, 1)), atol=1e-11)

    def test_as_target_detects_zero_boundary(self):
        """Test boundary_zero follows the boundary node values."""
        space = build_space(refined_square(2), 1, "dirichlet0")
        values = space.expand(np.ones(space.n_dofs))
        assert FeFunction(space, values).as_target().boundary_zero
        assert not FeFunction(space, values + 1.0).as_target().boundary_zero


class TestRitzProjection:
    """Test the Galerkin projection and E(v, M)."""

    def test_affine_member(self, square):
        """Test an affine v is in S(M) and is reported as a member."""
        result = decoupling_ratio(get_entry("poly_1").target, square, 1, "neumann")
        assert result.status == STATUS_MEMBER
        assert result.ratio == 0.0
        assert result.E < 1e-8

    def test_quadratic_reproduced(self):
        """Test E = 0 for v in P_2 with quadratics."""
        result = ritz_projection(get_entry("poly_2").target, build_space(refined_square(1), 2, "neumann"))
        assert result.E < 1e-8

    @pytest.mark.parametrize("degree", [1, 2])
    def test_energy_identity(self, degree):
        """Test ||grad v||^2 - ||grad V_M||^2 agrees with direct quadrature."""
        sine = get_entry("sine").target
        space = build_space(refined_square(2), degree, "dirichlet0")
        result = ritz_projection(sine, space, triangle_rule(20))

        assert 0.0 < result.E <= math.sqrt(math.pi ** 2 / 2)
        assert result.E_identity == pytest.approx(result.E, rel=1e-6)
        assert result.v_energy == pytest.approx(math.pi ** 2 / 2, rel=1e-10)
        assert result.iterations > 0

    def test_dirichlet_needs_zero_boundary(self, x_squared):
        """Test a target that is not zero on the boundary is rejected."""
        with pytest.raises(BoundaryConditionError):
            ritz_projection(x_squared, build_space(refined_square(1), 1, "dirichlet0"))

    def test_neumann_mean(self, x_squared):
        """Test int (v - V_M) = 0 for the neumann representative."""
        space = build_space(refined_square(2), 2, "neumann")
        result = ritz_projection(x_squared, space)
        assert space.node_integrals() @ result.coefficients == pytest.approx(1 / 3, rel=1e-10)

    def test_shift_invariance(self, x_squared):
        """Test E does not change when a constant is added to v."""
        space = build_space(refined_square(2), 1, "neumann")
        base = ritz_projection(x_squared, space)
        shifted = ritz_projection(x_squared.shifted(3.0), space)
        assert shifted.E == pytest.approx(base.E, rel=1e-9)

    def test_more_refinement_smaller_error(self, sine):
        """Test E decreases on nested refinements."""
        errors = [ritz_projection(sine, build_space(refined_square(k), 1, "dirichlet0")).E for k in (1, 3, 5)]
        assert errors[0] > errors[1] > errors[2]

    @pytest.mark.parametrize("degree", [1, 2])
    def test_galerkin_optimality(self, sine, degree):
        """Test no random W in S(M) beats V_M."""
        space = build_space(refined_square(2), degree, "dirichlet0")
        result = ritz_projection(sine, space)
        rng = np.random.default_rng(11)
        for scale in np.geomspace(1e-3, 1.0, 20):
            w = result.coefficients + space.expand(rng.normal(scale=scale, size=space.n_dofs))
            assert energy_error(sine, space, w) >= result.E * (1 - 1e-9)

    def test_coarse_levels_default_rule(self, sine, caplog):
        """Test E is monotone from level 1 to 2 with the default rule and matches the energy identity."""
        results = [ritz_projection(sine, build_space(refined_square(k), 1, "dirichlet0")) for k in (1, 2)]
        assert results[0].E >= results[1].E * (1 - 1e-8)
        for result in results:
            assert result.E_identity == pytest.approx(result.E, rel=1e-6)
        assert not [r for r in caplog.records if "Energy identity" in r.getMessage()]

    def test_coarse_element_rule(self):
        """Test wide elements get the highest rule and small ones keep theirs."""
        rule = triangle_rule(6)
        wide = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        assert element_rule(wide, rule).exact_degree == 20
        assert element_rule(wide * 0.1, rule) is rule


class TestConjugateGradients:
    """Test the sparse CG solver."""

    def test_small_spd_system(self):
        """Test a 2x2 SPD solve."""
        A = csr_matrix(np.array([[4.0, 1.0], [1.0, 3.0]]))
        b = np.array([1.0, 2.0])
        result = pcg(A, b)
        np.testing.assert_allclose(result.x, np.linalg.solve(A.toarray(), b), atol=1e-10)
        assert result.residual <= 1e-12

    def test_deflated_singular_system(self):
        """Test the singular Neumann matrix is solved in the zero-mean quotient."""
        A = laplacian_1d(6, neumann=True)
        b = np.array([1.0, -2.0, 0.5, 0.5, 1.0, -1.0])
        result = pcg(A, b, deflate_constants=True)
        assert result.x.mean() == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(A @ result.x, b, atol=1e-10)

    def test_zero_right_hand_side(self):
        """Test b = 0 returns zero without iterating."""
        result = pcg(laplacian_1d(4), np.zeros(4))
        assert result.iterations == 0
        assert not result.x.any()

    def test_iteration_cap(self):
        """Test SolverConvergenceError when the cap is hit."""
        b = np.random.default_rng(1).normal(size=20)
        with pytest.raises(SolverConvergenceError):
            pcg(laplacian_1d(20), b, tol=1e-14, max_iter=1)


class TestQuasiInterpolation:
    """Test Pi v built from local best fits and face functionals."""

    def test_discrete_functions_reproduced(self):
        """Test Pi V = V for V in S(M)."""
        space = build_space(refined_square(2), 2, "neumann")
        values = np.random.default_rng(5).normal(size=space.n_nodes)
        V = FeFunction(space, values).as_target()
        np.testing.assert_allclose(interpolate(V, space), values, atol=1e-9)

    def test_constants_reproduced(self):
        """Test constants are mapped to themselves."""
        space = build_space(refined_square(1), 3, "neumann")
        np.testing.assert_allclose(interpolate(constant_target(1.5), space), 1.5, atol=1e-12)

    def test_dirichlet_boundary_zero(self, sine):
        """Test boundary nodes are exactly zero for dirichlet0."""
        space = build_space(refined_square(2), 2, "dirichlet0")
        values = interpolate(sine, space)
        assert (values[space.on_boundary] == 0.0).all()

    @pytest.mark.parametrize("degree", [1, 2])
    def test_not_better_than_ritz(self, sine, degree):
        """Test ||grad(v - Pi v)|| >= E(v, M)."""
        space = build_space(refined_square(3), degree, "dirichlet0")
        interp = interpolation_error(sine, space)
        assert interp.error >= ritz_projection(sine, space).E * (1 - 1e-9)
        assert interp.error == pytest.approx(math.sqrt(interp.element_errors.sum()))

    @pytest.mark.parametrize("degree", [1, 2])
    def test_idempotent(self, sine, degree):
        """Test Pi(Pi v) = Pi v for a v outside S(M)."""
        space = build_space(refined_square(2), degree, "neumann")
        once = interpolate(sine, space)
        twice = interpolate(FeFunction(space, once).as_target(), space)
        np.testing.assert_allclose(twice, once, atol=1e-10)

    def test_locality(self, sine):
        """Test changing v on x >= 3/4 leaves Pi v unchanged at nodes with x <= 1/4."""
        ramp = TargetFunction(
            "sine_plus_ramp",
            lambda p: sine.value(p) + np.maximum(p[:, 0] - 0.75, 0.0) ** 3,
            lambda p: sine.gradient(p) + np.column_stack(
                (3 * np.maximum(p[:, 0] - 0.75, 0.0) ** 2, np.zeros(len(p)))),
        )
        space = build_space(refined_square(4), 2, "neumann")
        base = interpolate(sine, space)
        changed = interpolate(ramp, space)

        near = space.node_coords[:, 0] <= 0.25 + 1e-12
        far = space.node_coords[:, 0] >= 0.75 + 1e-12
        np.testing.assert_allclose(changed[near], base[near], atol=1e-12)
        assert np.abs(changed[far] - base[far]).max() > 1e-6

    @pytest.mark.parametrize("name,bc,degree,level", CASES)
    def test_bounded_by_local_sum(self, name, bc, degree, level):
        """Test ||grad(v - Pi v)|| <= 10 (sum_K e(v, K)^2)^(1/2)."""
        v = get_entry(name).target
        mesh = refined_square(level)
        space = build_space(mesh, degree, bc)
        local_sum = local_error_sum(v, mesh, degree)
        interp = interpolation_error(v, space)
        if local_sum > 0:
            assert interp.error <= 10 * local_sum
        else:
            assert interp.error < 1e-8

    def test_bowtie_rejected(self, bowtie):
        """Test a star that is not edge-connected raises StarConnectivityError."""
        space = build_space(bowtie, 1, "neumann")
        with pytest.raises(StarConnectivityError):
            check_stars(space)
        with pytest.raises(StarConnectivityError):
            interpolate(constant_target(1.0), space)


class TestDecouplingDiagnostics:
    """Test E(v, M) against the sum of local errors."""

    @pytest.mark.parametrize("name,bc,degree,level", CASES)
    def test_local_sum_below_global_error(self, name, bc, degree, level):
        """Test (sum_K e(v, K)^2)^(1/2) <= E(v, M)."""
        result = decoupling_ratio(get_entry(name).target, refined_square(level), degree, bc)
        assert result.local_sum <= result.E * (1 + 1e-6) + 1e-12
        if result.status == STATUS_FINITE:
            assert result.ratio >= 1 - 1e-6

    def test_singular_target(self):
        """Test the corner singularity on the L-shape."""
        lshape = get_entry("lshape").target
        result = decoupling_ratio(lshape, uniform_refine(l_shape(), 2), 1, "neumann")
        assert result.status == STATUS_FINITE
        assert 1 - 1e-6 <= result.ratio < 10

    def test_classify(self):
        """Test the finite, member and infinite cases."""
        assert classify_ratio(2.0, 1.0, 1.0) == (2.0, STATUS_FINITE)
        assert classify_ratio(0.0, 0.0, 1.0) == (0.0, STATUS_MEMBER)
        assert classify_ratio(0.5, 0.0, 1.0) == (math.inf, STATUS_INFINITE)

    def test_discontinuous_piecewise_linear(self):
        """Test a broken piecewise linear has zero local sum but positive E."""
        v = TargetFunction(
            "broken",
            lambda p: np.where(p[:, 0] > 0.5, p[:, 1], 0.0),
            lambda p: np.column_stack((np.zeros(len(p)), (p[:, 0] > 0.5).astype(float))),
        )
        result = decoupling_ratio(v, refined_square(2), 1, "neumann")
        assert result.status == STATUS_INFINITE
        assert result.E > 1e-3

    @pytest.mark.parametrize("degree", [1, 2])
    def test_sine_ratio_bounded(self, sine, degree):
        """Test the ratio stays moderate under uniform refinement."""
        for level in range(1, 5):
            result = decoupling_ratio(sine, refined_square(level), degree, "dirichlet0")
            assert 1 - 1e-6 <= result.ratio <= 10

    def test_theoretical_constant_dominates(self, sine):
        """Test the measured ratio stays below the constant from delta_K."""
        mesh = refined_square(2)
        space = build_space(mesh, 1, "dirichlet0")
        result = decoupling_ratio(sine, mesh, 1, "dirichlet0", space=space)
        assert result.ratio <= theoretical_decoupling_constant(space)

    def test_threaded_local_sum(self, sine):
        """Test the local sum does not depend on the worker count."""
        mesh = refined_square(3)
        assert local_error_sum(sine, mesh, 2, workers=4) == pytest.approx(local_error_sum(sine, mesh, 2))

    @pytest.mark.parametrize("degree", [2, 3])
    def test_partial_sum(self, sine, degree):
        """Test decoupling the partial derivatives can only lower the local sum."""
        mesh = refined_square(2)
        assert partial_error_sum(sine, mesh, degree) <= local_error_sum(sine, mesh, degree) * (1 + 1e-12)

    def test_partial_sum_linears(self, sine):
        """Test both sums agree for linears."""
        mesh = refined_square(2)
        assert partial_error_sum(sine, mesh, 1) == pytest.approx(local_error_sum(sine, mesh, 1), rel=1e-10)

    @pytest.mark.slow
    def test_convergence_order(self, sine_sweep):
        """Test the EOC of E over the last three uniform levels is ell."""
        degree, rows = sine_sweep
        first, last = rows[-3], rows[-1]
        assert [first["level"], last["level"]] == [4, 6]
        eoc = convergence_order(first["E"], last["E"], first["h"], last["h"])
        assert eoc == pytest.approx(degree, abs=0.15)
        # equal h ratios per level, so the reported EOCs average to the same value
        assert (rows[-2]["eoc"] + rows[-1]["eoc"]) / 2 == pytest.approx(eoc, rel=1e-9)

    @pytest.mark.slow
    def test_sine_ratio_stable(self, sine_sweep):
        """Test the ratio stays in [1, 10] with max/min at most 1.5 over levels 1 to 6."""
        _, rows = sine_sweep
        ratios = [row["ratio"] for row in rows]
        assert {row["status"] for row in rows} == {STATUS_FINITE}
        assert min(ratios) >= 1 - 1e-6
        assert max(ratios) <= 10
        assert max(ratios) / min(ratios) <= 1.5

    def test_records(self, sine):
        """Test the coefficient rows and the summary record."""
        mesh = refined_square(1)
        space = build_space(mesh, 1, "dirichlet0")
        result = decoupling_ratio(sine, mesh, 1, "dirichlet0", space=space)

        rows = coefficient_rows(space, result.ritz.coefficients)
        assert len(rows) == space.n_nodes
        assert sum(1 for row in rows if row[0] == -1) == int(space.on_boundary.sum())

        record = diagnostics_record(space, result, interp_error=1.0)
        assert record["dofs"] == space.n_dofs == 1
        assert record["elements"] == 4
        assert record["status"] == result.status
        assert "ritz" not in result.as_dict()


class TestAprioriBound:
    """Test the a priori bound and the Bramble-Hilbert ratios."""

    def test_affine_target(self, square):
        """Test an affine v has a zero second-order sum."""
        bound = apriori_bound(get_entry("poly_1").target, square, 1, 2)
        assert bound.raw_sum == 0.0
        assert bound.bound == 0.0

    @pytest.mark.parametrize("s", [0, 3])
    def test_order_out_of_range(self, square, sine, s):
        """Test s outside [1, ell + 1] raises InvalidParameterError."""
        with pytest.raises(InvalidParameterError):
            apriori_bound(sine, square, 1, s)

    def test_missing_derivatives(self):
        """Test targets without derivatives raise MissingDerivativeError."""
        with pytest.raises(MissingDerivativeError):
            apriori_bound(get_entry("lshape").target, l_shape(), 1, 2)

    def test_sine_on_uniform_mesh(self, sine):
        """Test the weighted sum on a mesh where every element has the same diameter."""
        mesh = refined_square(2)
        bound = apriori_bound(sine, mesh, 1, 2, delta_hat=1.5, rule=triangle_rule(20))
        h = math.sqrt(2) / 2
        assert bound.raw_sum == pytest.approx(h * math.sqrt(3 * math.pi ** 4 / 4), rel=1e-6)
        assert bound.constant == pytest.approx(1.5 * bramble_hilbert_constant(2))
        assert bound.bound == pytest.approx(bound.constant * bound.raw_sum)

    @pytest.mark.parametrize("name", ["sine", "x_squared", "poly_bump"])
    def test_bramble_hilbert_ratios(self, name):
        """Test e(v, K) <= C h_K |v|_{2,K} elementwise."""
        ratios = bramble_hilbert_ratios(get_entry(name).target, refined_square(2), 1, 2)
        assert ratios
        assert max(ratios.values()) <= 1.0
