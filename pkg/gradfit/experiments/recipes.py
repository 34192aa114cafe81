"""Experiment recipes behind the CLI subcommands."""

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from gradfit.approx.bounds import local_constants
from gradfit.approx.diagnostics import (
    STATUS_FINITE,
    apriori_bound,
    classify_ratio,
    coefficient_rows,
    decoupling_ratio,
    diagnostics_record,
    interpolation_error,
    partial_error_sum,
    theoretical_decoupling_constant,
)
from gradfit.approx.local import ErrorFunctional, default_rule
from gradfit.approx.ritz import ritz_projection
from gradfit.approx.space import build_space
from gradfit.approx.target import TargetFunction, check_gradient
from gradfit.constants import COMPLETION_STRESS_BISECTIONS
from gradfit.exceptions import MissingConfigError, MissingDerivativeError
from gradfit.experiments.registry import get_entry
from gradfit.logger import get_logger
from gradfit.mesh import geometry
from gradfit.mesh.builtin import BUILTIN_MESHES
from gradfit.mesh.core import Mesh
from gradfit.mesh.io import read_mesh
from gradfit.mesh.queries import boundary_vertices, max_shape_coefficient, star_count
from gradfit.mesh.refine import is_conforming, uniform_refine
from gradfit.quadrature import QuadRule, triangle_rule
from gradfit.state import ExperimentConfig
from gradfit.tree.algorithm import VARIANT_BUDGET, tree_budget_schedule, tree_threshold
from gradfit.tree.oracle import near_best_report
from gradfit.tree.report import final_record, step_records, stress_completion

logger = get_logger()

RATE_COLUMNS = ("level", "h", "elements", "dofs", "E", "local_sum", "ratio", "status",
                "apriori_bound", "eoc")
DECOUPLE_COLUMNS = ("level", "elements", "dofs", "local_sum", "E", "ratio", "status",
                    "partial_ratio", "interp_error", "max_delta", "theoretical_constant")
TREE_COLUMNS = ("variant", "parameter", "elements", "leaves", "E", "broken_error")


def load_mesh(source: str) -> Mesh:
    """A builtin mesh by name, or a mesh file."""
    if source in BUILTIN_MESHES:
        return BUILTIN_MESHES[source]()
    return read_mesh(Path(source))


def checked_target(config: ExperimentConfig, mesh: Mesh) -> TargetFunction:
    """
    The configured target, its gradient checked on ``mesh`` at points drawn with ``config.seed``.

    Raises:
        GradientConsistencyError: if the analytic gradient disagrees with central differences
    """
    v = get_entry(config.function).target
    check_gradient(v, mesh, seed=config.seed)
    return v


def volume_rule(config: ExperimentConfig) -> QuadRule:
    if config.quad_degree is not None:
        return triangle_rule(config.quad_degree)
    return default_rule(config.degree, config.quad_margin)


def mesh_size(mesh: Mesh) -> float:
    _, tris = mesh.active_geometry()
    return max(geometry.diameter(t) for t in tris)


def refined_levels(mesh: Mesh, levels: Sequence[int]):
    """Yield (level, mesh) for sorted levels, refining one copy incrementally."""
    current = mesh.copy()
    reached = 0
    for level in sorted(set(levels)):
        uniform_refine(current, level - reached)
        reached = level
        yield level, current


def convergence_order(e_coarse: float, e_fine: float, h_coarse: float, h_fine: float) -> Optional[float]:
    """Experimental order of convergence with respect to h."""
    if min(e_coarse, e_fine) <= 0.0 or h_coarse == h_fine:
        return None
    return math.log(e_coarse / e_fine) / math.log(h_coarse / h_fine)


def loglog_slope(sizes: Sequence[float], errors: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(error) against log(size), ignoring zero errors."""
    pairs = [(n, e) for n, e in zip(sizes, errors) if n > 0 and e > 0]
    if len(pairs) < 2:
        return None
    x, y = np.log(np.array(pairs, dtype=float)).T
    return float(np.polyfit(x, y, 1)[0])


def run_rates(config: ExperimentConfig) -> List[Dict]:
    """
    Errors on uniformly bisected meshes, one row per level.

    The a priori bound uses s = degree + 1 with the measured decoupling ratio;
    it is left empty for targets without derivatives of that order.
    """
    initial = load_mesh(config.mesh)
    v = checked_target(config, initial)
    rule = volume_rule(config)
    functional = ErrorFunctional(v, config.degree, rule)
    rows = []
    for level, mesh in refined_levels(initial, config.levels):
        space = build_space(mesh, config.degree, config.bc)
        result = decoupling_ratio(v, mesh, config.degree, config.bc, functional, rule,
                                  config.cg_tol, space, config.workers)
        delta_hat = result.ratio if result.status == STATUS_FINITE else 1.0
        try:
            bound = apriori_bound(v, mesh, config.degree, config.degree + 1, delta_hat, rule).bound
        except MissingDerivativeError:
            bound = None
        row = {
            "level": level,
            "h": mesh_size(mesh),
            "elements": mesh.n_active,
            "dofs": space.n_dofs,
            "E": result.E,
            "local_sum": result.local_sum,
            "ratio": result.ratio,
            "status": result.status,
            "apriori_bound": bound,
            "eoc": None,
        }
        if rows:
            row["eoc"] = convergence_order(rows[-1]["E"], row["E"], rows[-1]["h"], row["h"])
        rows.append(row)
        logger.info(f"level {level}: {mesh.n_active} elements, E = {result.E:.6e}")
    return rows


@dataclass
class DecouplingRun:
    rows: List[Dict] = field(default_factory=list)
    records: List[Dict] = field(default_factory=list)
    coefficients: List[tuple] = field(default_factory=list)


def run_decoupling(config: ExperimentConfig) -> DecouplingRun:
    """
    Local sum, global error, their ratio and the quasi-interpolation error per level.

    ``coefficients`` holds the (dof_id, x, y, value) rows of V_M on the finest level.
    """
    initial = load_mesh(config.mesh)
    v = checked_target(config, initial)
    rule = volume_rule(config)
    functional = ErrorFunctional(v, config.degree, rule)
    run = DecouplingRun()
    for level, mesh in refined_levels(initial, config.levels):
        space = build_space(mesh, config.degree, config.bc)
        result = decoupling_ratio(v, mesh, config.degree, config.bc, functional, rule,
                                  config.cg_tol, space, config.workers)
        scale = math.sqrt(result.ritz.v_energy)
        partial_ratio, _ = classify_ratio(result.E, partial_error_sum(v, mesh, config.degree, rule), scale)
        interp = interpolation_error(v, space, functional, rule)
        constants = local_constants(space)
        run.rows.append({
            "level": level,
            "elements": mesh.n_active,
            "dofs": space.n_dofs,
            "local_sum": result.local_sum,
            "E": result.E,
            "ratio": result.ratio,
            "status": result.status,
            "partial_ratio": partial_ratio,
            "interp_error": interp.error,
            "max_delta": constants.max_delta,
            "theoretical_constant": theoretical_decoupling_constant(space, constants),
        })
        run.records.append(dict(diagnostics_record(space, result, interp.error), level=level))
        run.coefficients = coefficient_rows(space, result.ritz.coefficients)
        logger.info(f"level {level}: ratio = {result.ratio:.6g}, interpolation error = {interp.error:.6e}")
    return run


@dataclass
class TreeRun:
    rows: List[Dict] = field(default_factory=list)
    records: List[Dict] = field(default_factory=list)
    slope: Optional[float] = None
    uniform_slope: Optional[float] = None


def run_tree(config: ExperimentConfig) -> TreeRun:
    """
    Threshold or budget runs of the tree algorithm with a log-log slope of E against #M.

    Raises:
        MissingConfigError: if the schedule for the chosen variant is empty
    """
    mesh = load_mesh(config.mesh)
    v = checked_target(config, mesh)
    functional = ErrorFunctional(v, config.degree, volume_rule(config))
    run = TreeRun()

    if config.variant == VARIANT_BUDGET:
        if not config.budgets:
            raise MissingConfigError("budget")
        results = tree_budget_schedule(v, mesh, config.degree, config.budgets, functional,
                                       workers=config.workers)
    else:
        if not config.thresholds:
            raise MissingConfigError("thresholds")
        results = []
        for t in sorted(config.thresholds, reverse=True):
            refined, tree = tree_threshold(v, mesh, config.degree, t, functional, workers=config.workers)
            results.append((t, refined, tree))

    logged_steps = 0
    for index, (parameter, refined, tree) in enumerate(results):
        ritz = ritz_projection(v, build_space(refined, config.degree, config.bc),
                               functional.rule, config.cg_tol)
        run.rows.append({
            "variant": config.variant,
            "parameter": parameter,
            "elements": refined.n_active,
            "leaves": tree.leaf_count,
            "E": ritz.E,
            "broken_error": tree.broken_error(),
        })
        # budget snapshots share their history, so only new steps are logged
        start = logged_steps if config.variant == VARIANT_BUDGET else 0
        run.records.extend(dict(record, run=index) for record in step_records(tree)[start:])
        logged_steps = len(tree.steps)
        run.records.append(dict(final_record(tree, ritz.E, refined.n_active), run=index))
        logger.info(f"{config.variant} {parameter}: {refined.n_active} elements, E = {ritz.E:.6e}")

    run.slope = loglog_slope([r["elements"] for r in run.rows], [r["E"] for r in run.rows])

    if config.compare_uniform:
        uniform = []
        for level, refined in refined_levels(mesh, config.levels):
            ritz = ritz_projection(v, build_space(refined, config.degree, config.bc),
                                   functional.rule, config.cg_tol)
            uniform.append({
                "variant": "uniform",
                "parameter": level,
                "elements": refined.n_active,
                "leaves": refined.n_active,
                "E": ritz.E,
                "broken_error": math.sqrt(math.fsum(functional.many(refined, refined.active_ids()))),
            })
        run.rows.extend(uniform)
        run.uniform_slope = loglog_slope([r["elements"] for r in uniform], [r["E"] for r in uniform])
    return run


def run_oracle(config: ExperimentConfig) -> Dict:
    """
    Near-best comparison of the threshold algorithm with the sigma' oracle.

    ``completion_stress`` completes COMPLETION_STRESS_BISECTIONS random
    bisections of the initial mesh, drawn with ``config.seed``.

    Raises:
        MissingConfigError: if no thresholds are given
        EnumerationBudgetError: if a threshold refines beyond the oracle's budget
    """
    if not config.thresholds:
        raise MissingConfigError("thresholds")
    mesh = load_mesh(config.mesh)
    v = checked_target(config, mesh)
    functional = ErrorFunctional(v, config.degree, volume_rule(config))
    report = near_best_report(v, mesh, config.degree,
                              sorted(config.thresholds, reverse=True), config.bc, functional=functional)
    stress = stress_completion(mesh, COMPLETION_STRESS_BISECTIONS, config.seed)
    return {
        "function": config.function,
        "degree": config.degree,
        "bc": config.bc,
        "rows": [asdict(row) for row in report.rows],
        "C1_realized": report.realized_c1,
        "completion_overhead": report.completion_overhead,
        "completion_stress": dict(asdict(stress), ratio=stress.ratio, seed=config.seed),
    }


def mesh_info(config: ExperimentConfig) -> Dict:
    """Size, shape and connectivity figures of the mesh at the finest requested level."""
    mesh = load_mesh(config.mesh)
    level = max(config.levels, default=0)
    uniform_refine(mesh, level)
    _, tris = mesh.active_geometry()
    diameters = [geometry.diameter(t) for t in tris]
    return {
        "mesh": config.mesh,
        "level": level,
        "vertices": mesh.n_vertices,
        "elements": mesh.n_active,
        "boundary_faces": len(mesh.boundary_faces()),
        "boundary_vertices": len(boundary_vertices(mesh)),
        "h_max": max(diameters),
        "h_min": min(diameters),
        "sigma_max": max_shape_coefficient(mesh),
        "star_count": star_count(mesh),
        "area": mesh.domain_area(),
        "conforming": is_conforming(mesh),
    }
