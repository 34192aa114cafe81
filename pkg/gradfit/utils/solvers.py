"""Preconditioned conjugate gradients for sparse symmetric systems."""

import math
from typing import NamedTuple, Optional

import numpy as np
from scipy.sparse import spmatrix

from gradfit.constants import CG_MAX_ITER_FACTOR, CG_MIN_ITER, CG_TOL
from gradfit.exceptions import SolverConvergenceError
from gradfit.logger import get_logger

logger = get_logger()


class CGResult(NamedTuple):
    x: np.ndarray
    iterations: int
    residual: float


def _remove_mean(r: np.ndarray) -> np.ndarray:
    return r - r.mean()


def pcg(A: spmatrix, b: np.ndarray, tol: float = CG_TOL, max_iter: Optional[int] = None,
        x0: Optional[np.ndarray] = None, deflate_constants: bool = False) -> CGResult:
    """
    Jacobi-preconditioned CG until ||r|| <= tol * ||b||.

    With ``deflate_constants`` the system is solved on the complement of the
    constant vector: residuals and preconditioned residuals are projected and
    the solution is returned with zero mean. This is how the singular Neumann
    stiffness matrix is handled.

    Args:
        A: Symmetric positive (semi)definite matrix in CSR format
        b: Right-hand side
        tol: Relative residual tolerance
        max_iter: Iteration cap; defaults to max(200, 10 * n)
        x0: Optional initial guess
        deflate_constants: Solve in the zero-mean quotient

    Raises:
        SolverConvergenceError: if the cap is reached first
    """
    n = len(b)
    max_iter = max_iter or max(CG_MIN_ITER, CG_MAX_ITER_FACTOR * n)
    project = _remove_mean if deflate_constants else (lambda r: r)

    diag = A.diagonal()
    inv_diag = np.where(diag > 0.0, 1.0 / np.where(diag > 0.0, diag, 1.0), 1.0)

    b = project(np.asarray(b, dtype=float))
    b_norm = float(np.linalg.norm(b))
    x = np.zeros(n) if x0 is None else project(np.array(x0, dtype=float))
    if n == 0 or b_norm == 0.0:
        return CGResult(np.zeros(n), 0, 0.0)

    r = project(b - A @ x)
    residual = float(np.linalg.norm(r)) / b_norm
    if residual <= tol:
        return CGResult(x, 0, residual)
    z = project(inv_diag * r)
    p = z.copy()
    rz = float(r @ z)

    for iteration in range(1, max_iter + 1):
        Ap = A @ p
        pAp = float(p @ Ap)
        if pAp <= 0.0 or not math.isfinite(pAp):
            raise SolverConvergenceError(iteration, residual, tol)
        alpha = rz / pAp
        x += alpha * p
        r = project(r - alpha * Ap)

        residual = float(np.linalg.norm(r)) / b_norm
        if residual <= tol:
            logger.debug(f"CG converged in {iteration} iterations (residual {residual:.2e})")
            return CGResult(project(x), iteration, residual)

        z = project(inv_diag * r)
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new

    raise SolverConvergenceError(max_iter, residual, tol)
