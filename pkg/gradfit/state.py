"""Resolved configuration of one experiment run."""

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from gradfit.approx.space import BOUNDARY_CONDITIONS
from gradfit.constants import (
    BC_DIRICHLET0,
    CG_TOL,
    MAX_POLY_DEGREE,
    MAX_TRIANGLE_RULE_DEGREE,
    MESH_UNIT_SQUARE,
    MIN_POLY_DEGREE,
    QUAD_DEGREE_MARGIN,
)
from gradfit.exceptions import InvalidConfigError
from gradfit.mesh.builtin import BUILTIN_MESHES

COMMANDS = ("rates", "decouple", "tree", "oracle", "mesh-info")
VARIANTS = ("threshold", "budget")


@dataclass
class ExperimentConfig:
    command: str
    function: str = "sine"
    degree: int = 1
    bc: Optional[str] = None  # None: first condition the target supports
    mesh: Optional[str] = None  # None: the target's own domain

    levels: List[int] = field(default_factory=lambda: [0, 1, 2, 3])
    thresholds: List[float] = field(default_factory=list)
    budgets: List[int] = field(default_factory=list)
    variant: str = "threshold"
    compare_uniform: bool = False

    quad_degree: Optional[int] = None
    quad_margin: int = QUAD_DEGREE_MARGIN
    cg_tol: float = CG_TOL
    out: Optional[str] = None
    seed: int = 0
    workers: Optional[int] = None

    def validate(self) -> "ExperimentConfig":
        """
        Check every field; return self so calls can be chained.

        Raises:
            InvalidConfigError: on the first invalid field
            UnknownFunctionError: if the target function is not registered
        """
        from gradfit.experiments.registry import get_entry

        if self.command not in COMMANDS:
            raise InvalidConfigError("command", self.command, f"expected one of {', '.join(COMMANDS)}")
        if not MIN_POLY_DEGREE <= self.degree <= MAX_POLY_DEGREE:
            raise InvalidConfigError("degree", self.degree,
                                     f"expected {MIN_POLY_DEGREE}..{MAX_POLY_DEGREE}")
        if self.command == "mesh-info":
            self.mesh = self.mesh or MESH_UNIT_SQUARE
            self.bc = self.bc or BC_DIRICHLET0
        else:
            entry = get_entry(self.function)
            self.mesh = self.mesh or entry.mesh
            self.bc = self.bc or entry.bcs[0]
        if self.bc not in BOUNDARY_CONDITIONS:
            raise InvalidConfigError("bc", self.bc, f"expected one of {', '.join(BOUNDARY_CONDITIONS)}")
        if self.mesh not in BUILTIN_MESHES and not Path(self.mesh).is_file():
            raise InvalidConfigError("mesh", self.mesh,
                                     f"not a builtin mesh ({', '.join(BUILTIN_MESHES)}) or an existing file")
        if self.command != "mesh-info":
            if not entry.supports(self.bc):
                raise InvalidConfigError("bc", self.bc,
                                         f"'{self.function}' supports {', '.join(entry.bcs)}")
        if any(level < 0 for level in self.levels):
            raise InvalidConfigError("levels", self.levels, "levels must be non-negative")
        if any(not t > 0 for t in self.thresholds):
            raise InvalidConfigError("thresholds", self.thresholds, "thresholds must be positive")
        if any(n < 1 for n in self.budgets):
            raise InvalidConfigError("budget", self.budgets, "budgets must be positive")
        if self.variant not in VARIANTS:
            raise InvalidConfigError("variant", self.variant, f"expected one of {', '.join(VARIANTS)}")
        if self.quad_degree is not None and not 1 <= self.quad_degree <= MAX_TRIANGLE_RULE_DEGREE:
            raise InvalidConfigError("quad_degree", self.quad_degree,
                                     f"expected 1..{MAX_TRIANGLE_RULE_DEGREE}")
        if self.quad_margin < 0:
            raise InvalidConfigError("quad_margin", self.quad_margin, "must be non-negative")
        if not self.cg_tol > 0:
            raise InvalidConfigError("cg_tol", self.cg_tol, "must be positive")
        if self.seed < 0:
            raise InvalidConfigError("seed", self.seed, "must be non-negative")
        if self.workers is not None and self.workers < 1:
            raise InvalidConfigError("workers", self.workers, "must be at least 1")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
