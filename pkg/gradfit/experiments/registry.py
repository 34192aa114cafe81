"""Named target functions used by the experiments."""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from numpy.polynomial import hermite
from scipy import integrate

from gradfit.approx.target import TargetFunction, check_gradient
from gradfit.constants import BC_DIRICHLET0, BC_NEUMANN, MESH_L_SHAPE, MESH_UNIT_SQUARE
from gradfit.exceptions import UnknownFunctionError
from gradfit.logger import get_logger
from gradfit.mesh.builtin import BUILTIN_MESHES

logger = get_logger()


@dataclass(frozen=True)
class FunctionRegistryEntry:
    """
    A target function with its domain and known reference values.

    ``seminorms[s]`` is |v|_{s,2;Omega}^2 summed over the distinct
    derivatives d^s/dx^(s-j)dy^j, j = 0..s.
    """

    name: str
    target: TargetFunction
    mesh: str = MESH_UNIT_SQUARE
    bcs: Tuple[str, ...] = (BC_NEUMANN,)
    seminorms: Dict[int, float] = field(default_factory=dict)
    numerical_reference: bool = False

    def supports(self, bc: str) -> bool:
        return bc in self.bcs


def _sine() -> FunctionRegistryEntry:
    pi = math.pi

    def value(p):
        return np.sin(pi * p[:, 0]) * np.sin(pi * p[:, 1])

    def gradient(p):
        x, y = p[:, 0], p[:, 1]
        return pi * np.column_stack((np.cos(pi * x) * np.sin(pi * y), np.sin(pi * x) * np.cos(pi * y)))

    def derivatives(s, p):
        x, y = p[:, 0], p[:, 1]
        return pi ** s * np.column_stack([
            np.sin(pi * x + (s - j) * pi / 2) * np.sin(pi * y + j * pi / 2) for j in range(s + 1)
        ])

    target = TargetFunction(
        "sine", value, gradient, derivatives,
        exact_energy=pi ** 2 / 2, boundary_zero=True,
        description="sin(pi x) sin(pi y) on the unit square",
    )
    seminorms = {s: pi ** (2 * s) * (s + 1) / 4 for s in range(1, 6)}
    return FunctionRegistryEntry("sine", target, MESH_UNIT_SQUARE, (BC_DIRICHLET0, BC_NEUMANN), seminorms)


def _polar(p) -> Tuple[np.ndarray, np.ndarray]:
    r = np.hypot(p[:, 0], p[:, 1])
    theta = np.mod(np.arctan2(p[:, 1], p[:, 0]), 2 * math.pi)
    return r, theta


def _lshape() -> FunctionRegistryEntry:
    def value(p):
        r, theta = _polar(p)
        return r ** (2 / 3) * np.sin(2 * theta / 3)

    def gradient(p):
        r, theta = _polar(p)
        safe = np.where(r > 0.0, r, 1.0)
        scale = np.where(r > 0.0, 2 / 3 * safe ** (-1 / 3), 0.0)
        return np.column_stack((-scale * np.sin(theta / 3), scale * np.cos(theta / 3)))

    # |grad v|^2 = 4/9 r^(-2/3) is radial; each of the three unit squares contributes
    # 2 * 3/4 * int_0^{pi/4} cos(t)^(-4/3) dt times 4/9.
    corner, _ = integrate.quad(lambda t: math.cos(t) ** (-4 / 3), 0.0, math.pi / 4)
    energy = 3 * 4 / 9 * 1.5 * corner

    target = TargetFunction(
        "lshape", value, gradient,
        singular_points=((0.0, 0.0),), exact_energy=energy,
        description="r^(2/3) sin(2 theta/3) on the L-shaped domain",
    )
    return FunctionRegistryEntry("lshape", target, MESH_L_SHAPE, (BC_NEUMANN,), {1: energy},
                                 numerical_reference=True)


def _arctan_derivative(order: int, w: np.ndarray) -> np.ndarray:
    q = 1.0 + w ** 2
    table = {
        1: lambda: 1.0 / q,
        2: lambda: -2.0 * w / q ** 2,
        3: lambda: (6.0 * w ** 2 - 2.0) / q ** 3,
        4: lambda: 24.0 * w * (1.0 - w ** 2) / q ** 4,
        5: lambda: 24.0 * (5.0 * w ** 4 - 10.0 * w ** 2 + 1.0) / q ** 5,
    }
    return table[order]()


def _atan_layer(sharpness: float = 100.0) -> FunctionRegistryEntry:
    def value(p):
        return np.arctan(sharpness * (p[:, 0] + p[:, 1] - 1.0))

    def gradient(p):
        g = sharpness * _arctan_derivative(1, sharpness * (p[:, 0] + p[:, 1] - 1.0))
        return np.column_stack((g, g))

    def derivatives(s, p):
        if s > 5:
            return np.zeros((len(p), s + 1))
        d = sharpness ** s * _arctan_derivative(s, sharpness * (p[:, 0] + p[:, 1] - 1.0))
        return np.repeat(d[:, None], s + 1, axis=1)

    energy = 2 * sharpness * math.atan(sharpness)
    target = TargetFunction(
        "atan_layer", value, gradient, derivatives, exact_energy=energy,
        description="arctan(100 (x + y - 1)), an interior layer along the anti-diagonal",
    )
    return FunctionRegistryEntry("atan_layer", target, MESH_UNIT_SQUARE, (BC_NEUMANN,), {1: energy})


def _ridge_derivatives(a: float, b: float, c: float, k: int) -> Callable[[int, np.ndarray], np.ndarray]:
    """d^s/dx^(s-j)dy^j of (a x + b y + c)^k."""

    def derivatives(s, p):
        if s > k:
            return np.zeros((len(p), s + 1))
        base = (a * p[:, 0] + b * p[:, 1] + c) ** (k - s) * math.factorial(k) / math.factorial(k - s)
        return np.column_stack([a ** (s - j) * b ** j * base for j in range(s + 1)])

    return derivatives


def _poly(k: int) -> FunctionRegistryEntry:
    """(x + 2y + 1/2)^k + (3x - y)^k, a member of P_k that is not a ridge function."""
    first = _ridge_derivatives(1.0, 2.0, 0.5, k)
    second = _ridge_derivatives(3.0, -1.0, 0.0, k)

    def value(p):
        return (p[:, 0] + 2 * p[:, 1] + 0.5) ** k + (3 * p[:, 0] - p[:, 1]) ** k

    def gradient(p):
        return first(1, p) + second(1, p)

    def derivatives(s, p):
        return first(s, p) + second(s, p)

    name = f"poly_{k}"
    target = TargetFunction(name, value, gradient, derivatives,
                            description=f"polynomial of total degree {k}")
    return FunctionRegistryEntry(name, target, MESH_UNIT_SQUARE, (BC_NEUMANN,), {k + 1: 0.0})


def _x_squared() -> FunctionRegistryEntry:
    def value(p):
        return p[:, 0] ** 2

    def gradient(p):
        return np.column_stack((2 * p[:, 0], np.zeros(len(p))))

    derivatives = _ridge_derivatives(1.0, 0.0, 0.0, 2)
    target = TargetFunction("x_squared", value, gradient, derivatives, exact_energy=4 / 3,
                            description="x^2 on the unit square")
    return FunctionRegistryEntry("x_squared", target, MESH_UNIT_SQUARE, (BC_NEUMANN,),
                                 {1: 4 / 3, 2: 4.0, 3: 0.0})


def _gaussian_derivative(order: int, t: np.ndarray, a: float) -> np.ndarray:
    """d^n/dt^n exp(-a^2 t^2) = (-a)^n H_n(a t) exp(-a^2 t^2)."""
    coefficients = np.zeros(order + 1)
    coefficients[order] = 1.0
    return (-a) ** order * hermite.hermval(a * t, coefficients) * np.exp(-(a * t) ** 2)


def _poly_bump(center=(0.3, 0.3), width: float = 40.0) -> FunctionRegistryEntry:
    """x^2 + exp(-40 |x - c|^2)."""
    a = math.sqrt(width)
    cx, cy = center
    square = _ridge_derivatives(1.0, 0.0, 0.0, 2)

    def derivatives(s, p):
        X, Y = p[:, 0] - cx, p[:, 1] - cy
        bump = np.column_stack([
            _gaussian_derivative(s - j, X, a) * _gaussian_derivative(j, Y, a) for j in range(s + 1)
        ])
        return square(s, p) + bump

    def value(p):
        return p[:, 0] ** 2 + np.exp(-width * ((p[:, 0] - cx) ** 2 + (p[:, 1] - cy) ** 2))

    def gradient(p):
        return derivatives(1, p)

    target = TargetFunction("poly_bump", value, gradient, derivatives,
                            description="x^2 plus a Gaussian bump at (0.3, 0.3)")
    return FunctionRegistryEntry("poly_bump", target, MESH_UNIT_SQUARE, (BC_NEUMANN,))


def _build() -> Dict[str, FunctionRegistryEntry]:
    entries = [_sine(), _lshape(), _atan_layer(), _x_squared(), _poly_bump()]
    entries += [_poly(k) for k in range(1, 5)]
    return {entry.name: entry for entry in entries}


@lru_cache(maxsize=None)
def registry() -> Dict[str, FunctionRegistryEntry]:
    """
    All registered target functions, keyed by name.

    Every entry's analytic gradient is checked against central differences
    on its initial mesh when the registry is first built.
    """
    entries = _build()
    for entry in entries.values():
        check_gradient(entry.target, BUILTIN_MESHES[entry.mesh]())
    logger.debug(f"Registered {len(entries)} target functions")
    return entries


def get_entry(name: str) -> FunctionRegistryEntry:
    """
    Raises:
        UnknownFunctionError: if ``name`` is not registered
    """
    entries = registry()
    if name not in entries:
        raise UnknownFunctionError(name, sorted(entries))
    return entries[name]


def function_names() -> Tuple[str, ...]:
    return tuple(sorted(_build()))


def exact_seminorm(name: str, order: int) -> Optional[float]:
    return get_entry(name).seminorms.get(order)
