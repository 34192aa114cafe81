"""Stiffness assembly and the Ritz projection."""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from gradfit.approx.local import ElementSample, default_rule, sample_element
from gradfit.approx.space import FeSpace
from gradfit.approx.target import TargetFunction
from gradfit.constants import BC_DIRICHLET0, BC_NEUMANN, CG_TOL, ENERGY_IDENTITY_RTOL
from gradfit.exceptions import BoundaryConditionError
from gradfit.logger import get_logger
from gradfit.polynomial import lagrange_basis
from gradfit.quadrature import QuadRule, triangle_rule
from gradfit.utils.solvers import pcg

logger = get_logger()


@lru_cache(maxsize=None)
def _bary_stiffness(degree: int) -> np.ndarray:
    """S[i, j, a, b] = (1/|K|) int_K dPhi_i/dlambda_a dPhi_j/dlambda_b, the same on every triangle."""
    basis = lagrange_basis(degree)
    rule = triangle_rule(max(2 * degree - 2, 1))
    d = basis.bary_derivatives(rule.points)
    table = np.einsum("q,qia,qjb->ijab", rule.weights, d, d)
    table.setflags(write=False)
    return table


def batch_bary_gradients(tris: np.ndarray) -> np.ndarray:
    """Barycentric gradients of many triangles, shape (m, 3, 2)."""
    edges = np.stack((tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0]), axis=2)
    inv = np.linalg.inv(edges)
    grads = np.empty((len(tris), 3, 2))
    grads[:, 1:] = inv
    grads[:, 0] = -inv.sum(axis=1)
    return grads


def element_stiffness(space: FeSpace) -> np.ndarray:
    """Local stiffness matrices of all active elements, shape (m, nb, nb)."""
    _, tris = space.mesh.active_geometry()
    grads = batch_bary_gradients(tris)
    cross = np.einsum("mad,mbd->mab", grads, grads)
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    areas = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    return np.einsum("ijab,mab->mij", _bary_stiffness(space.degree), cross * areas[:, None, None])


def assemble_stiffness(space: FeSpace) -> csr_matrix:
    """Global stiffness on the dofs of ``space`` (eliminated nodes dropped)."""
    local = element_stiffness(space)
    dofs = space.node_dof[space.element_nodes]
    nb = dofs.shape[1]
    rows = np.repeat(dofs, nb, axis=1).ravel()
    cols = np.tile(dofs, (1, nb)).ravel()
    data = local.ravel()
    keep = (rows >= 0) & (cols >= 0)
    matrix = coo_matrix((data[keep], (rows[keep], cols[keep])), shape=(space.n_dofs, space.n_dofs))
    return matrix.tocsr()


def sample_space(v: TargetFunction, space: FeSpace, rule: Optional[QuadRule] = None) -> List[ElementSample]:
    rule = rule or default_rule(space.degree)
    _, tris = space.mesh.active_geometry()
    return [sample_element(v, tri, rule) for tri in tris]


def element_errors(space: FeSpace, node_values: np.ndarray, samples: List[ElementSample]) -> np.ndarray:
    """||grad(v - V)||_K^2 per element for the discrete V given by node values."""
    basis = lagrange_basis(space.degree)
    _, tris = space.mesh.active_geometry()
    grads = batch_bary_gradients(tris)
    errors = np.empty(len(samples))
    for row, sample in enumerate(samples):
        coeffs = node_values[space.element_nodes[row]]
        dlam = np.einsum("qbk,b->qk", basis.bary_derivatives(sample.bary), coeffs)
        residual = sample.gradients - dlam @ grads[row]
        errors[row] = sample.quad.weights @ (residual ** 2).sum(axis=1)
    return errors


def energy_error(v: TargetFunction, space: FeSpace, node_values: np.ndarray,
                 rule: Optional[QuadRule] = None) -> float:
    """||grad(v - V)||_Omega by direct quadrature."""
    errors = element_errors(space, node_values, sample_space(v, space, rule))
    return math.sqrt(max(math.fsum(errors), 0.0))


@dataclass
class RitzResult:
    """
    V_M and E(v, M) = ||grad(v - V_M)||.

    ``coefficients`` are node values (zero on eliminated boundary nodes).
    ``E_identity`` is sqrt(||grad v||^2 - ||grad V_M||^2) when the exact
    energy of v is known.
    """

    coefficients: np.ndarray
    E: float
    iterations: int
    residual: float
    E_identity: Optional[float] = None
    element_errors: Optional[np.ndarray] = None
    v_energy: float = 0.0


def ritz_projection(v: TargetFunction, space: FeSpace, rule: Optional[QuadRule] = None,
                    cg_tol: float = CG_TOL) -> RitzResult:
    """
    Galerkin projection of v onto the space in the H1 seminorm.

    Neumann spaces are solved in the zero-mean quotient; the returned
    representative makes v - V_M have zero mean over the domain.

    Raises:
        BoundaryConditionError: if a dirichlet0 space gets a target not declared zero on the boundary
        SolverConvergenceError: if CG does not reach ``cg_tol``
    """
    if space.bc == BC_DIRICHLET0 and not v.boundary_zero:
        raise BoundaryConditionError(v.name, space.bc)

    samples = sample_space(v, space, rule)
    basis = lagrange_basis(space.degree)
    _, tris = space.mesh.active_geometry()
    grads = batch_bary_gradients(tris)

    load = np.zeros(space.n_nodes)
    for row, sample in enumerate(samples):
        dphi = basis.bary_derivatives(sample.bary) @ grads[row]
        local = np.einsum("q,qid,qd->i", sample.quad.weights, dphi, sample.gradients)
        np.add.at(load, space.element_nodes[row], local)

    matrix = assemble_stiffness(space)
    neumann = space.bc == BC_NEUMANN
    solution = pcg(matrix, space.restrict(load), tol=cg_tol, deflate_constants=neumann)
    values = space.expand(solution.x)

    if neumann:
        integrals = space.node_integrals()
        v_integral = math.fsum(s.quad.weights @ s.values for s in samples)
        values += (v_integral - integrals @ values) / space.mesh.domain_area()

    errors = element_errors(space, values, samples)
    E = math.sqrt(max(math.fsum(errors), 0.0))
    v_energy = math.fsum(s.quad.weights @ (s.gradients ** 2).sum(axis=1) for s in samples)

    E_identity = None
    if v.exact_energy is not None:
        discrete = float(solution.x @ (matrix @ solution.x))
        gap = v.exact_energy - discrete
        E_identity = math.sqrt(max(gap, 0.0))
        if abs(gap - E ** 2) > ENERGY_IDENTITY_RTOL * v.exact_energy:
            logger.warning(f"Energy identity and direct quadrature disagree for '{v.name}': "
                           f"{E_identity:.6e} vs {E:.6e}")

    logger.debug(f"Ritz projection of '{v.name}' on {space.n_dofs} dofs: E = {E:.6e}")
    return RitzResult(values, E, solution.iterations, solution.residual, E_identity, errors, v_energy)
