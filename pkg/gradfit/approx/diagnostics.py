"""Decoupling diagnostics: local sums, ratios, a priori bounds and local checks."""

import math
from dataclasses import asdict, dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from gradfit.approx.bounds import (
    LocalConstants,
    bramble_hilbert_constant,
    local_constants,
    poincare_trace_constants,
)
from gradfit.approx.interpolant import face_functionals, interpolate
from gradfit.approx.local import (
    ErrorFunctional,
    decoupled_sample_error,
    default_rule,
    local_epsilons,
    sample_element,
    total_epsilon,
)
from gradfit.approx.ritz import RitzResult, element_errors, ritz_projection, sample_space
from gradfit.approx.space import FeSpace, build_space
from gradfit.approx.target import TargetFunction, seminorm_density
from gradfit.constants import CG_TOL, MEMBER_TOL
from gradfit.exceptions import InvalidParameterError
from gradfit.logger import get_logger
from gradfit.mesh.core import Mesh
from gradfit.polynomial import lagrange_basis, reference_node, reference_norm_table
from gradfit.quadrature import QuadRule, element_quadrature

logger = get_logger()

STATUS_FINITE = "finite"
STATUS_MEMBER = "member"
STATUS_INFINITE = "infinite"


def local_error_sum(v: TargetFunction, mesh: Mesh, degree: int,
                    functional: Optional[ErrorFunctional] = None, workers: Optional[int] = None) -> float:
    """(sum_K e(v, K)^2)^(1/2) over the active elements."""
    epsilons = local_epsilons(v, mesh, degree, workers=workers, functional=functional)
    return math.sqrt(total_epsilon(epsilons))


@dataclass
class DecouplingResult:
    """E / local_sum with the 0/0 and x/0 cases reported separately."""

    E: float
    local_sum: float
    ratio: float
    status: str
    ritz: Optional[RitzResult] = None

    def as_dict(self) -> Dict:
        record = asdict(self)
        record.pop("ritz")
        return record


def classify_ratio(E: float, local_sum: float, scale: float) -> Tuple[float, str]:
    """
    Ratio and status for E / local_sum.

    ``local_sum`` below MEMBER_TOL * scale counts as zero. E comes out of an
    iterative solve, so it only has to fall below sqrt(MEMBER_TOL) * scale.
    """
    scale = max(scale, np.finfo(float).tiny)
    if local_sum > MEMBER_TOL * scale:
        return E / local_sum, STATUS_FINITE
    if E <= math.sqrt(MEMBER_TOL) * scale:
        return 0.0, STATUS_MEMBER
    return math.inf, STATUS_INFINITE


def decoupling_ratio(v: TargetFunction, mesh: Mesh, degree: int, bc: str,
                     functional: Optional[ErrorFunctional] = None, rule: Optional[QuadRule] = None,
                     cg_tol: float = CG_TOL, space: Optional[FeSpace] = None,
                     workers: Optional[int] = None) -> DecouplingResult:
    """
    E(v, M) over (sum_K e(v, K)^2)^(1/2).

    Status ``member`` marks v in S(M) (both vanish), ``infinite`` marks a
    piecewise polynomial that is not continuous (only the sum vanishes).
    """
    space = space or build_space(mesh, degree, bc)
    functional = functional or ErrorFunctional(v, degree, rule)
    ritz = ritz_projection(v, space, rule, cg_tol)
    local_sum = local_error_sum(v, mesh, degree, functional, workers)
    ratio, status = classify_ratio(ritz.E, local_sum, math.sqrt(ritz.v_energy))
    logger.debug(f"Decoupling ratio for '{v.name}' ({status}): {ratio:.6g}")
    return DecouplingResult(ritz.E, local_sum, ratio, status, ritz)


def partial_error_sum(v: TargetFunction, mesh: Mesh, degree: int,
                      rule: Optional[QuadRule] = None) -> float:
    """(sum_K ebar(v, K)^2)^(1/2): elements and partial derivatives decoupled."""
    rule = rule or default_rule(degree)
    squares = [decoupled_sample_error(sample_element(v, mesh.geometry(eid), rule), degree) ** 2
               for eid in mesh.active_ids()]
    return math.sqrt(math.fsum(squares))


def partial_decoupling_ratio(v: TargetFunction, mesh: Mesh, degree: int, bc: str,
                             rule: Optional[QuadRule] = None, cg_tol: float = CG_TOL) -> DecouplingResult:
    """E(v, M) over the partial error sum."""
    ritz = ritz_projection(v, build_space(mesh, degree, bc), rule, cg_tol)
    partial_sum = partial_error_sum(v, mesh, degree, rule)
    ratio, status = classify_ratio(ritz.E, partial_sum, math.sqrt(ritz.v_energy))
    return DecouplingResult(ritz.E, partial_sum, ratio, status, ritz)


def theoretical_decoupling_constant(space: FeSpace, constants: Optional[LocalConstants] = None) -> float:
    """sqrt(1 + max_K delta_K^2 * #L(K) * N_M), an upper bound for the element decoupling constant."""
    constants = constants or local_constants(space)
    n_nodes = len(lagrange_basis(space.degree))
    return math.sqrt(1.0 + constants.max_delta ** 2 * n_nodes * constants.star_count)


class AprioriBound(NamedTuple):
    raw_sum: float
    constant: float
    bound: float


def seminorm_squares(v: TargetFunction, mesh: Mesh, s: int, rule: QuadRule) -> Dict[int, float]:
    """|v|_{s,2;K}^2 for every active element."""
    def density(points):
        return seminorm_density(v, s, points)

    values = {}
    for eid in mesh.active_ids():
        quad = element_quadrature(density, mesh.geometry(eid), rule, v.singular_points)
        values[eid] = quad.integrate(density(quad.points))
    return values


def apriori_bound(v: TargetFunction, mesh: Mesh, degree: int, s: int,
                  delta_hat: float = 1.0, rule: Optional[QuadRule] = None) -> AprioriBound:
    """
    (sum_K h_K^(2(s-1)) |v|_{s,2;K}^2)^(1/2) and the bound C times that sum.

    C = s!/(ceil(s/2)!)^2 C_P^(s-1) delta_hat, with delta_hat the measured
    decoupling ratio of the mesh family.

    Raises:
        InvalidParameterError: unless 1 <= s <= degree + 1
        MissingDerivativeError: if v has no derivatives of order s
    """
    if not 1 <= s <= degree + 1:
        raise InvalidParameterError("s", s, f"an integer in [1, {degree + 1}]")
    rule = rule or default_rule(degree)
    squares = seminorm_squares(v, mesh, s, rule)
    raw = math.sqrt(math.fsum(mesh.diameter(eid) ** (2 * (s - 1)) * sq for eid, sq in squares.items()))
    constant = bramble_hilbert_constant(s) * delta_hat
    return AprioriBound(raw, constant, constant * raw)


def bramble_hilbert_ratios(v: TargetFunction, mesh: Mesh, degree: int, s: int,
                           functional: Optional[ErrorFunctional] = None) -> Dict[int, float]:
    """e(v, K) / (C h_K^(s-1) |v|_{s,2;K}) per element with nonzero seminorm."""
    functional = functional or ErrorFunctional(v, degree)
    squares = seminorm_squares(v, mesh, s, functional.rule)
    constant = bramble_hilbert_constant(s)
    ratios = {}
    for eid, sq in squares.items():
        if sq > 0.0:
            bound = constant * mesh.diameter(eid) ** (s - 1) * math.sqrt(sq)
            ratios[eid] = functional.fit(mesh, eid).e / bound
    return ratios


def local_decoupling_bound(space: FeSpace, element_id: int, epsilons: Dict[int, float],
                           delta: float) -> float:
    """
    Right-hand side e(v,K)^2 + delta_K^2 sum over z in L(K) of sum over K' containing z of e(v,K')^2.
    """
    row = space.element_row(element_id)
    coupled = math.fsum(
        epsilons[k] for node in space.element_nodes[row] for k in space.node_elements[node]
    )
    return epsilons[element_id] + delta ** 2 * coupled


def nodal_deviation_check(v: TargetFunction, space: FeSpace, node: int,
                          functional: Optional[ErrorFunctional] = None) -> List[Tuple[int, float, float]]:
    """
    |P_K(z) - N_{z;F_z}(v)| against 2 C_Tr ||Psi_ref|| sum over K' in the star of h_K' |K'|^(-1/2) e(v, K').

    Returns:
        (element, lhs, rhs) for every element K containing the constrained node z
    """
    if not space.constrained[node]:
        raise InvalidParameterError("node", node, "a constrained node")
    functional = functional or ErrorFunctional(v, space.degree)
    mesh = space.mesh
    face = space.node_face[node]
    key = space.node_keys[node]
    sz = face_functionals(v, space, [face])[(face, key)]

    _, c_tr = poincare_trace_constants(2)
    star = space.node_elements[node]
    first_row = space.element_row(star[0])
    local = int(np.flatnonzero(space.element_nodes[first_row] == node)[0])
    alpha = lagrange_basis(space.degree).nodes[local]
    psi = reference_norm_table(space.degree)[reference_node(alpha).multi_index].psi
    rhs = 2.0 * c_tr * psi * math.fsum(
        mesh.diameter(k) / math.sqrt(mesh.area(k)) * functional.fit(mesh, k).e for k in star
    )

    checks = []
    for eid in star:
        row = space.element_row(eid)
        j = int(np.flatnonzero(space.element_nodes[row] == node)[0])
        lhs = abs(functional.fit(mesh, eid).coefficients[j] - sz)
        checks.append((eid, lhs, rhs))
    return checks


@dataclass
class InterpolationResult:
    node_values: np.ndarray
    error: float
    element_errors: np.ndarray


def interpolation_error(v: TargetFunction, space: FeSpace,
                        functional: Optional[ErrorFunctional] = None,
                        rule: Optional[QuadRule] = None) -> InterpolationResult:
    """Pi v and ||grad(v - Pi v)|| with its elementwise squares."""
    values = interpolate(v, space, functional)
    errors = element_errors(space, values, sample_space(v, space, rule))
    return InterpolationResult(values, math.sqrt(max(math.fsum(errors), 0.0)), errors)


def coefficient_rows(space: FeSpace, node_values: np.ndarray) -> List[Tuple[int, float, float, float]]:
    """(dof_id, x, y, value) per node; eliminated boundary nodes carry dof_id -1."""
    return [
        (int(space.node_dof[i]), float(x), float(y), float(node_values[i]))
        for i, (x, y) in enumerate(space.node_coords)
    ]


def diagnostics_record(space: FeSpace, decoupling: DecouplingResult,
                       interp_error: Optional[float] = None) -> Dict:
    return {
        "E": decoupling.E,
        "local_sum": decoupling.local_sum,
        "ratio": decoupling.ratio,
        "status": decoupling.status,
        "interp_error": interp_error,
        "dofs": space.n_dofs,
        "elements": space.n_elements,
    }


__all__ = [
    "AprioriBound",
    "DecouplingResult",
    "InterpolationResult",
    "STATUS_FINITE",
    "STATUS_INFINITE",
    "STATUS_MEMBER",
    "apriori_bound",
    "bramble_hilbert_ratios",
    "classify_ratio",
    "coefficient_rows",
    "decoupling_ratio",
    "diagnostics_record",
    "interpolation_error",
    "local_decoupling_bound",
    "local_error_sum",
    "nodal_deviation_check",
    "partial_decoupling_ratio",
    "partial_error_sum",
    "seminorm_squares",
    "theoretical_decoupling_constant",
]
