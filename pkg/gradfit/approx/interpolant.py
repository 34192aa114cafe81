"""Quasi-interpolation from local best approximations and Scott-Zhang functionals."""

from typing import Dict, Optional, Tuple

import numpy as np

from gradfit.approx.local import ErrorFunctional, LocalBestFit
from gradfit.approx.space import FeSpace, NodeKey, face_node_keys
from gradfit.approx.target import TargetFunction
from gradfit.constants import BC_DIRICHLET0, QUAD_DEGREE_MARGIN
from gradfit.exceptions import StarConnectivityError
from gradfit.logger import get_logger
from gradfit.mesh.core import FaceKey
from gradfit.mesh.queries import is_star_face_connected
from gradfit.polynomial import scott_zhang_values
from gradfit.quadrature import QuadRule, edge_rule

logger = get_logger()


def check_stars(space: FeSpace):
    """Raise StarConnectivityError for the first vertex whose star is not edge-connected."""
    vertices = sorted({key[0][0] for key in space.node_keys if len(key) == 1})
    for vid in vertices:
        if not is_star_face_connected(space.mesh, vid):
            raise StarConnectivityError(vid)


def face_functionals(v: TargetFunction, space: FeSpace, faces,
                     rule: Optional[QuadRule] = None) -> Dict[Tuple[FaceKey, NodeKey], float]:
    """N_{z;F}(v) for every node of each listed face, keyed by (face, node key)."""
    rule = rule or edge_rule(2 * space.degree + QUAD_DEGREE_MARGIN)
    values = {}
    for face in faces:
        start = space.mesh.vertex(face.a)
        end = space.mesh.vertex(face.b)
        sz = scott_zhang_values(v.value, start, end, space.degree, rule)
        for key, value in zip(face_node_keys(face, space.degree), sz):
            values[(face, key)] = float(value)
    return values


def interpolate(v: TargetFunction, space: FeSpace, functional: Optional[ErrorFunctional] = None,
                edge_quad: Optional[QuadRule] = None) -> np.ndarray:
    """
    Node values of Pi v.

    Unconstrained nodes take P_K(z) from the mean-matched local best fit of
    their only element; constrained nodes take N_{z;F_z}(v). Boundary nodes of
    a dirichlet0 space get an exact zero when v is declared zero on the
    boundary.

    Raises:
        StarConnectivityError: if some vertex star is not edge-connected
    """
    check_stars(space)
    functional = functional or ErrorFunctional(v, space.degree)
    mesh = space.mesh

    zero_boundary = space.bc == BC_DIRICHLET0 and v.boundary_zero
    needed_faces = {
        space.node_face[i] for i in space.node_face
        if not (zero_boundary and space.on_boundary[i])
    }
    sz = face_functionals(v, space, sorted(needed_faces), edge_quad)

    fits: Dict[int, LocalBestFit] = {}
    values = np.empty(space.n_nodes)
    for i, key in enumerate(space.node_keys):
        if zero_boundary and space.on_boundary[i]:
            values[i] = 0.0
        elif space.constrained[i]:
            values[i] = sz[(space.node_face[i], key)]
        else:
            eid = space.node_elements[i][0]
            fit = fits.get(eid)
            if fit is None:
                fit = fits[eid] = functional.fit(mesh, eid)
            local = int(np.flatnonzero(space.element_nodes[space.element_row(eid)] == i)[0])
            values[i] = fit.coefficients[local]
    logger.debug(f"Interpolated '{v.name}': {len(sz)} face functionals, {len(fits)} local fits")
    return values
