"""Target functions: value, gradient and optional higher derivatives."""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from gradfit.constants import (
    GRADIENT_CHECK_POINTS,
    GRADIENT_CHECK_RTOL,
    GRADIENT_CHECK_STEP,
)
from gradfit.exceptions import GradientConsistencyError, MissingDerivativeError
from gradfit.logger import get_logger
from gradfit.mesh import geometry
from gradfit.mesh.core import Mesh

logger = get_logger()

PointFunction = Callable[[np.ndarray], np.ndarray]
DerivativeFunction = Callable[[int, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TargetFunction:
    """
    A function v on the domain together with its gradient.

    ``value`` maps (n, 2) points to (n,) values and ``gradient`` to (n, 2).
    ``derivatives(s, points)`` returns (n, s+1) columns ordered as
    d^s v / dx^(s-j) dy^j for j = 0..s.
    """

    name: str
    value: PointFunction
    gradient: PointFunction
    derivatives: Optional[DerivativeFunction] = None
    singular_points: Tuple[Tuple[float, float], ...] = ()
    exact_energy: Optional[float] = None
    boundary_zero: bool = False
    description: str = field(default="", compare=False)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.value(np.atleast_2d(points))

    def derivative(self, order: int, points: np.ndarray) -> np.ndarray:
        if self.derivatives is None:
            raise MissingDerivativeError(self.name, order)
        return self.derivatives(order, np.atleast_2d(points))

    def shifted(self, constant: float) -> "TargetFunction":
        """v + constant; every gradient quantity is unchanged."""
        value = self.value
        return replace(
            self,
            name=f"{self.name}+{constant:g}",
            value=lambda p: value(p) + constant,
            boundary_zero=self.boundary_zero and constant == 0.0,
        )


def check_gradient(target: TargetFunction, mesh: Mesh, n_points: int = GRADIENT_CHECK_POINTS,
                   step: float = GRADIENT_CHECK_STEP, rtol: float = GRADIENT_CHECK_RTOL,
                   seed: int = 0):
    """
    Compare the analytic gradient with central differences at interior points.

    Points are random barycentric combinations inside the active elements,
    kept away from the declared singular points.

    Raises:
        GradientConsistencyError: on the first point whose relative error exceeds ``rtol``
    """
    rng = np.random.default_rng(seed)
    ids, tris = mesh.active_geometry()
    scale = max(geometry.diameter(t) for t in tris)
    h = step * scale

    picks = rng.integers(0, len(ids), size=n_points)
    bary = rng.dirichlet(np.ones(3), size=n_points)
    bary = 0.8 * bary + 0.2 / 3.0
    points = np.einsum("nk,nkd->nd", bary, tris[picks])
    singular = np.asarray(target.singular_points, dtype=float).reshape(-1, 2)
    if len(singular):
        far = np.min(np.linalg.norm(points[:, None, :] - singular[None, :, :], axis=2), axis=1)
        points = points[far > 1e3 * h]

    analytic = target.gradient(points)
    ex = np.array([h, 0.0])
    ey = np.array([0.0, h])
    numeric = np.column_stack((
        (target.value(points + ex) - target.value(points - ex)) / (2 * h),
        (target.value(points + ey) - target.value(points - ey)) / (2 * h),
    ))
    for point, a, n in zip(points, analytic, numeric):
        error = np.linalg.norm(a - n) / max(np.linalg.norm(a), 1.0)
        if error > rtol:
            raise GradientConsistencyError(target.name, tuple(point), float(error))
    logger.debug(f"Gradient check passed for '{target.name}' at {len(points)} points")


def seminorm_density(target: TargetFunction, order: int, points: Sequence) -> np.ndarray:
    """Sum over |alpha| = order of (d^alpha v)^2 at the given points."""
    return (target.derivative(order, points) ** 2).sum(axis=1)
