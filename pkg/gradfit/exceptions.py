"""Custom exceptions for gradfit."""


class GradfitError(Exception):
    """Base exception for all gradfit errors."""

    def __init__(self, message: str, details: str = None):
        self.message = message
        self.details = details
        super().__init__(self.message)

    def __str__(self):
        if self.details:
            return f"{self.message}: {self.details}"
        return self.message


# Mesh exceptions
class MeshError(GradfitError):
    """Base exception for mesh construction and refinement errors."""
    pass


class DegenerateElementError(MeshError):
    """Raised when a triangle has (numerically) zero area."""

    def __init__(self, element: int, area: float = 0.0):
        self.element = element
        self.area = area
        super().__init__(
            "Degenerate element",
            f"Element {element} has area {area:.3e}"
        )


class NonConformingMeshError(MeshError):
    """Raised when a hanging vertex is found where a conforming mesh is required."""

    def __init__(self, element: int = None, vertex: int = None):
        self.element = element
        self.vertex = vertex
        details = None
        if element is not None and vertex is not None:
            details = f"Vertex {vertex} lies inside an edge of element {element}"
        elif element is not None:
            details = f"Element {element} has a hanging vertex"
        super().__init__("Non-conforming mesh", details)


class InactiveElementError(MeshError):
    """Raised when an operation needs a leaf element but got a refined one."""

    def __init__(self, element: int):
        self.element = element
        super().__init__("Element is not active", f"Element {element}")


class CompletionError(MeshError):
    """Raised when conformity closure does not terminate within its cap."""

    def __init__(self, bisections: int):
        self.bisections = bisections
        super().__init__(
            "Completion did not terminate",
            f"Stopped after {bisections} bisections; the initial refinement edges "
            "are probably not admissible"
        )


class PointOutsideDomainError(MeshError):
    """Raised when a query point is not covered by any active element."""

    def __init__(self, point):
        self.point = tuple(float(c) for c in point)
        super().__init__("Point outside domain", f"{self.point}")


class MeshFormatError(MeshError):
    """Raised when a mesh file cannot be parsed."""

    def __init__(self, source: str, reason: str):
        self.source = source
        self.reason = reason
        super().__init__(f"Invalid mesh file {source}", reason)


# Quadrature exceptions
class QuadratureError(GradfitError):
    """Base exception for numerical integration errors."""
    pass


class UnsupportedRuleError(QuadratureError):
    """Raised when a quadrature rule of the requested degree is not available."""

    def __init__(self, kind: str, degree: int, max_degree: int):
        self.kind = kind
        self.degree = degree
        self.max_degree = max_degree
        super().__init__(
            f"Unsupported {kind} rule degree {degree}",
            f"Supported degrees are 1..{max_degree}"
        )


class QuadratureConvergenceError(QuadratureError):
    """Raised when graded composite integration does not settle."""

    def __init__(self, estimate: float, levels: int, change: float):
        self.estimate = estimate
        self.levels = levels
        self.change = change
        super().__init__(
            "Composite quadrature did not converge",
            f"Estimate {estimate:.12e} after {levels} levels "
            f"(last relative change {change:.3e})"
        )


# Polynomial exceptions
class PolynomialError(GradfitError):
    """Base exception for polynomial basis errors."""
    pass


class UnsupportedDegreeError(PolynomialError):
    """Raised when a polynomial degree outside the supported range is requested."""

    def __init__(self, degree: int, min_degree: int, max_degree: int):
        self.degree = degree
        super().__init__(
            f"Unsupported polynomial degree {degree}",
            f"Supported degrees are {min_degree}..{max_degree}"
        )


class SingularSystemError(PolynomialError):
    """Raised when a nodal or mass system cannot be inverted."""

    def __init__(self, system: str, reason: str = None):
        self.system = system
        super().__init__(f"Singular {system} system", reason)


# Approximation exceptions
class ApproximationError(GradfitError):
    """Base exception for local and global best approximation errors."""
    pass


class SingularGramError(ApproximationError):
    """Raised when the gradient Gram system of an element is singular."""

    def __init__(self, element: int = None):
        self.element = element
        details = f"Element {element}" if element is not None else None
        super().__init__("Singular gradient Gram system", details)


class NonZeroMeanError(ApproximationError):
    """Raised when a zero-mean polynomial is required but the input has a mean."""

    def __init__(self, mean: float):
        self.mean = mean
        super().__init__("Input does not have zero mean", f"Mean value {mean:.3e}")


class StarConnectivityError(ApproximationError):
    """Raised when a node star is not connected through shared edges."""

    def __init__(self, vertex: int):
        self.vertex = vertex
        super().__init__(
            "Star is not face-connected",
            f"Elements around vertex {vertex} touch only at the vertex"
        )


class BoundaryConditionError(ApproximationError):
    """Raised when the target function is inconsistent with the boundary condition."""

    def __init__(self, function: str, bc: str):
        self.function = function
        self.bc = bc
        super().__init__(
            f"Target '{function}' is not compatible with bc={bc}",
            "dirichlet0 requires a target declared to vanish on the boundary"
        )


class SolverConvergenceError(ApproximationError):
    """Raised when conjugate gradients does not reach the requested tolerance."""

    def __init__(self, iterations: int, residual: float, tolerance: float):
        self.iterations = iterations
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            "Conjugate gradients did not converge",
            f"Relative residual {residual:.3e} > {tolerance:.1e} "
            f"after {iterations} iterations"
        )


class MissingDerivativeError(ApproximationError):
    """Raised when higher derivatives are needed but the target has none."""

    def __init__(self, function: str, order: int):
        self.function = function
        self.order = order
        super().__init__(
            f"Target '{function}' provides no derivatives of order {order}"
        )


class GradientConsistencyError(ApproximationError):
    """Raised when a target gradient disagrees with finite differences."""

    def __init__(self, function: str, point, relative_error: float):
        self.function = function
        self.point = tuple(float(c) for c in point)
        self.relative_error = relative_error
        super().__init__(
            f"Gradient of '{function}' is inconsistent with its values",
            f"Relative error {relative_error:.3e} at {self.point}"
        )


class InvalidParameterError(ApproximationError):
    """Raised when a numeric parameter lies outside its admissible range."""

    def __init__(self, name: str, value, expected: str):
        self.name = name
        self.value = value
        super().__init__(f"Invalid {name}={value}", f"Expected {expected}")


# Tree approximation exceptions
class TreeError(GradfitError):
    """Base exception for tree approximation errors."""
    pass


class TreeDepthError(TreeError):
    """Raised when refinement reaches the depth cap; carries the partial result."""

    def __init__(self, depth_cap: int, element: int, partial=None):
        self.depth_cap = depth_cap
        self.element = element
        self.partial = partial
        super().__init__(
            "Depth cap reached",
            f"Element {element} would exceed generation {depth_cap}"
        )


class BudgetError(TreeError):
    """Raised when an element budget is below the initial mesh size."""

    def __init__(self, budget: int, initial: int):
        self.budget = budget
        self.initial = initial
        super().__init__(
            f"Budget {budget} is below the initial mesh size",
            f"The initial mesh has {initial} elements"
        )


class EnumerationBudgetError(TreeError):
    """Raised when the exhaustive subtree search would be too large."""

    def __init__(self, bisections: int, limit: int):
        self.bisections = bisections
        self.limit = limit
        super().__init__(
            "Subtree enumeration budget exceeded",
            f"{bisections} bisections requested, at most {limit} allowed"
        )


class InsufficientRunsError(TreeError):
    """Raised when no run carries information for a fitted constant."""

    def __init__(self, quantity: str):
        self.quantity = quantity
        super().__init__(f"No usable runs to fit {quantity}")


# Configuration exceptions
class ConfigurationError(GradfitError):
    """Base exception for configuration errors."""
    pass


class InvalidConfigError(ConfigurationError):
    """Raised when configuration is invalid."""

    def __init__(self, key: str, value: str, reason: str):
        self.key = key
        self.value = value
        self.reason = reason
        super().__init__(
            f"Invalid configuration for '{key}'",
            f"Value '{value}': {reason}"
        )


class MissingConfigError(ConfigurationError):
    """Raised when required configuration is missing."""

    def __init__(self, key: str):
        self.key = key
        super().__init__(f"Missing required configuration: {key}")


class UnknownFunctionError(ConfigurationError):
    """Raised when a target function name is not registered."""

    def __init__(self, name: str, available: list = None):
        self.name = name
        self.available = available or []
        details = f"Available: {', '.join(self.available)}" if self.available else None
        super().__init__(f"Unknown target function '{name}'", details)
