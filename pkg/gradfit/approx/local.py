"""Local best approximation errors on single elements."""

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from gradfit.approx.target import TargetFunction
from gradfit.constants import (
    COARSE_ELEMENT_DIAMETER,
    MAX_TRIANGLE_RULE_DEGREE,
    MEAN_MATCH_RTOL,
    QUAD_DEGREE_MARGIN,
)
from gradfit.exceptions import SingularGramError
from gradfit.logger import get_logger
from gradfit.mesh import geometry
from gradfit.mesh.core import Mesh
from gradfit.polynomial import ElementPolynomial, check_degree, lagrange_basis
from gradfit.quadrature import PhysicalQuadrature, QuadRule, element_quadrature, triangle_rule

logger = get_logger()


def default_rule(degree: int, margin: int = QUAD_DEGREE_MARGIN,
                 quad_degree: Optional[int] = None) -> QuadRule:
    """Volume rule of degree 2*degree + margin unless overridden."""
    exact = quad_degree if quad_degree is not None else 2 * degree + margin
    return triangle_rule(min(exact, MAX_TRIANGLE_RULE_DEGREE))


def element_rule(tri: np.ndarray, rule: QuadRule) -> QuadRule:
    """``rule``, raised to the highest triangle rule on elements wider than COARSE_ELEMENT_DIAMETER."""
    if rule.exact_degree < MAX_TRIANGLE_RULE_DEGREE and geometry.diameter(tri) > COARSE_ELEMENT_DIAMETER:
        return triangle_rule(MAX_TRIANGLE_RULE_DEGREE)
    return rule


@dataclass
class ElementSample:
    """Target values and gradients at the quadrature points of one triangle."""

    tri: np.ndarray
    quad: PhysicalQuadrature
    bary: np.ndarray
    values: np.ndarray
    gradients: np.ndarray

    @property
    def area(self) -> float:
        return float(self.quad.weights.sum())


def sample_element(v: TargetFunction, tri: np.ndarray, rule: QuadRule) -> ElementSample:
    """Quadrature on ``tri``, graded towards any singular point of ``v`` in the element."""
    tri = np.asarray(tri, dtype=float)
    quad = element_quadrature(
        lambda p: (v.gradient(p) ** 2).sum(axis=1), tri, element_rule(tri, rule), v.singular_points
    )
    return ElementSample(
        tri=tri,
        quad=quad,
        bary=geometry.barycentric_coordinates(tri, quad.points),
        values=v.value(quad.points),
        gradients=v.gradient(quad.points),
    )


@dataclass
class LocalBestFit:
    """
    P_K: the minimizer of ||grad(v - P)||_K over P_ell with int_K P = int_K v.

    ``coefficients`` are nodal values in the element's Lagrange basis.
    """

    element: int
    degree: int
    coefficients: np.ndarray
    e: float
    mean_matched: bool
    orthogonality_residual: float = 0.0

    @property
    def epsilon(self) -> float:
        return self.e ** 2

    def polynomial(self, tri: np.ndarray) -> ElementPolynomial:
        return ElementPolynomial(tri, self.degree, self.coefficients)


def fit_sample(sample: ElementSample, degree: int, element: int = -1) -> LocalBestFit:
    """
    Solve the gradient Gram system on the sample.

    Index 0 is dropped: {Phi_i, i >= 1} together with the constants span P_ell,
    so the reduced Gram matrix is SPD. The constant is fixed afterwards by
    matching the mean of v.
    """
    check_degree(degree)
    basis = lagrange_basis(degree)
    w = sample.quad.weights
    phi = basis.values(sample.bary)
    dphi = basis.gradients(sample.bary, geometry.barycentric_gradients(sample.tri))

    gram = np.einsum("q,qid,qjd->ij", w, dphi, dphi)
    rhs = np.einsum("q,qid,qd->i", w, dphi, sample.gradients)
    try:
        factor = cho_factor(gram[1:, 1:])
    except LinAlgError:
        raise SingularGramError(element)
    coefficients = np.concatenate(([0.0], cho_solve(factor, rhs[1:])))

    v_integral = float(w @ sample.values)
    coefficients += (v_integral - float(w @ (phi @ coefficients))) / sample.area

    residual = sample.gradients - np.einsum("qid,i->qd", dphi, coefficients)
    e = math.sqrt(max(float(w @ (residual ** 2).sum(axis=1)), 0.0))

    mean_gap = abs(float(w @ (phi @ coefficients)) - v_integral)
    mean_scale = max(float(w @ np.abs(sample.values)), np.finfo(float).tiny)
    scale = max(np.abs(rhs).max(), np.abs(gram).max() * np.ptp(coefficients), np.finfo(float).tiny)
    orthogonality = np.abs(gram @ coefficients - rhs).max() / scale
    return LocalBestFit(
        element=element,
        degree=degree,
        coefficients=coefficients,
        e=e,
        mean_matched=mean_gap <= MEAN_MATCH_RTOL * mean_scale,
        orthogonality_residual=float(orthogonality),
    )


def decoupled_sample_error(sample: ElementSample, degree: int) -> float:
    """
    ebar: L2 distance of each partial derivative from P_(ell-1), combined.

    For ell = 1 the projection space is the constants.
    """
    check_degree(degree)
    w = sample.quad.weights
    g = sample.gradients
    if degree == 1:
        residual = g - (w @ g) / sample.area
    else:
        phi = lagrange_basis(degree - 1).values(sample.bary)
        mass = np.einsum("q,qi,qj->ij", w, phi, phi)
        try:
            factor = cho_factor(mass)
        except LinAlgError:
            raise SingularGramError()
        residual = g - phi @ cho_solve(factor, phi.T @ (w[:, None] * g))
    return math.sqrt(max(float(w @ (residual ** 2).sum(axis=1)), 0.0))


def local_best_fit(v: TargetFunction, mesh: Mesh, element_id: int, degree: int,
                   rule: Optional[QuadRule] = None) -> LocalBestFit:
    """
    Mean-matched local best approximation on one active element.

    Args:
        v: Target function
        mesh: Mesh holding the element
        element_id: Element id
        degree: Polynomial degree ell (1..4)
        rule: Volume rule; defaults to degree 2*ell + 4

    Returns:
        LocalBestFit with the nodal coefficients of P_K and e(v, K)
    """
    rule = rule or default_rule(degree)
    sample = sample_element(v, mesh.geometry(element_id), rule)
    return fit_sample(sample, degree, element_id)


def decoupled_local_error(v: TargetFunction, mesh: Mesh, element_id: int, degree: int,
                          rule: Optional[QuadRule] = None) -> float:
    rule = rule or default_rule(degree)
    return decoupled_sample_error(sample_element(v, mesh.geometry(element_id), rule), degree)


def epsilon(v: TargetFunction, mesh: Mesh, element_id: int, degree: int,
            rule: Optional[QuadRule] = None) -> float:
    """epsilon(K) = e(v, K)^2."""
    return local_best_fit(v, mesh, element_id, degree, rule).epsilon


class ErrorFunctional:
    """
    Cached epsilon(K) for one target function and degree.

    Entries are keyed by the element's forest path, so they stay valid across
    mesh copies and rollbacks.
    """

    def __init__(self, target: TargetFunction, degree: int, rule: Optional[QuadRule] = None):
        check_degree(degree)
        self.target = target
        self.degree = degree
        self.rule = rule or default_rule(degree)
        self._fits: Dict[Tuple[int, str], LocalBestFit] = {}
        self._lock = threading.Lock()
        self.evaluations = 0

    def __len__(self) -> int:
        return len(self._fits)

    def fit(self, mesh: Mesh, element_id: int) -> LocalBestFit:
        key = mesh.element_path(element_id)
        cached = self._fits.get(key)
        if cached is not None:
            if cached.element != element_id:
                cached = LocalBestFit(element_id, cached.degree, cached.coefficients, cached.e,
                                      cached.mean_matched, cached.orthogonality_residual)
            return cached
        fit = local_best_fit(self.target, mesh, element_id, self.degree, self.rule)
        with self._lock:
            self._fits[key] = fit
            self.evaluations += 1
        return fit

    def __call__(self, mesh: Mesh, element_id: int) -> float:
        return self.fit(mesh, element_id).epsilon

    def many(self, mesh: Mesh, element_ids: Iterable[int], workers: Optional[int] = None) -> List[float]:
        """epsilon for several elements, in the given order."""
        ids = list(element_ids)
        if workers and workers > 1 and len(ids) > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                return list(executor.map(lambda eid: self(mesh, eid), ids))
        return [self(mesh, eid) for eid in ids]


def local_epsilons(v: TargetFunction, mesh: Mesh, degree: int,
                   element_ids: Optional[Iterable[int]] = None, workers: Optional[int] = None,
                   rule: Optional[QuadRule] = None,
                   functional: Optional[ErrorFunctional] = None) -> Dict[int, float]:
    """
    epsilon(K) for every listed element (default: all active ones).

    Evaluations may run in a thread pool; the result is ordered like the input.
    """
    ids = mesh.active_ids() if element_ids is None else list(element_ids)
    functional = functional or ErrorFunctional(v, degree, rule)
    values = functional.many(mesh, ids, workers)
    logger.debug(f"Evaluated {len(ids)} local errors for '{v.name}' (degree {degree})")
    return dict(zip(ids, values))


def total_epsilon(epsilons: Dict[int, float]) -> float:
    return math.fsum(epsilons.values())
