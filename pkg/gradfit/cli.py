import typer
from rich.console import Console
from rich.table import Table
from dataclasses import fields
from pathlib import Path
from typing import Callable, Dict, List, Optional

from gradfit.config import resolve_settings
from gradfit.constants import EXIT_CONFIG_ERROR, EXIT_NUMERICAL_FAILURE, VERSION
from gradfit.exceptions import ConfigurationError, GradfitError, InvalidConfigError
from gradfit.experiments import output
from gradfit.experiments.recipes import (
    DECOUPLE_COLUMNS,
    RATE_COLUMNS,
    TREE_COLUMNS,
    mesh_info,
    run_decoupling,
    run_oracle,
    run_rates,
    run_tree,
)
from gradfit.logger import get_logger, setup_logging
from gradfit.state import ExperimentConfig

app = typer.Typer(help="gradfit - local and global best approximation of gradients on bisection meshes")
# Tables and messages go to stderr so that CSV on stdout stays machine-readable
console = Console(stderr=True)

__version__ = VERSION


def version_callback(value: bool):
    if value:
        console.print(f"gradfit version {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool = typer.Option(
        None,
        "--version",
        "-V",
        callback=version_callback,
        is_eager=True,
        help="Show gradfit version and exit"
    )
):
    """
    gradfit CLI entry point.
    """
    pass


def parse_levels(text: Optional[str]) -> Optional[List[int]]:
    """'a-b' ranges and comma lists, e.g. '1-4' or '0,2,5'."""
    if text is None:
        return None
    levels = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = (int(p) for p in part.split("-", 1))
                levels.extend(range(lo, hi + 1))
            elif part:
                levels.append(int(part))
    except ValueError:
        raise InvalidConfigError("levels", text, "expected a range like 1-4 or a comma list")
    if not levels:
        raise InvalidConfigError("levels", text, "no levels given")
    return levels


def parse_list(text: Optional[str], cast: Callable, key: str) -> Optional[list]:
    if text is None:
        return None
    try:
        return [cast(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidConfigError(key, text, f"expected a comma list of {cast.__name__} values")


def build_config(command: str, debug: bool, log_file: Optional[str], **flags) -> ExperimentConfig:
    """
    Resolve flags against .gradfit.json and GRADFIT_* variables, then validate.

    Raises:
        ConfigurationError: on unknown keys or invalid values
    """
    settings = resolve_settings(str(Path.cwd()), **flags)
    setup_logging(debug=debug, log_file=log_file, level=settings.pop("log_level", None))
    known = {f.name for f in fields(ExperimentConfig)} - {"command"}
    for key in settings:
        if key not in known:
            raise InvalidConfigError(key, settings[key], "unknown setting")
    return ExperimentConfig(command=command, **settings).validate()


def run_command(action: Callable[[], None], debug: bool):
    """Run an action, mapping configuration errors to exit 2 and numerical failures to exit 3."""
    try:
        action()
    except ConfigurationError as e:
        console.print(f"[red]CONFIG ERROR:[/red] {e}")
        raise typer.Exit(code=EXIT_CONFIG_ERROR)
    except GradfitError as e:
        console.print(f"[red]NUMERICAL FAILURE:[/red] {e}")
        if debug:
            get_logger().exception("Command failed")
        raise typer.Exit(code=EXIT_NUMERICAL_FAILURE)


def show_rows(title: str, rows: List[Dict], columns) -> None:
    table = Table(title=title)
    for column in columns:
        table.add_column(column, justify="right")
    for row in rows:
        table.add_row(*(_short(row.get(column)) for column in columns))
    console.print(table)


def _short(value) -> str:
    if isinstance(value, float):
        return f"{value:.4g}"
    return "" if value is None else str(value)


# Shared options
FUNCTION = typer.Option(None, "--function", "-f", help="Registered target function (default: sine)")
DEGREE = typer.Option(None, "--degree", "-l", help="Polynomial degree 1..4 (default: 1)")
BC = typer.Option(None, "--bc", help="dirichlet0 | neumann (default: first one the function supports)")
MESH = typer.Option(None, "--mesh", "-m", help="unit-square | l-shape | mesh file (default: the function's domain)")
LEVELS = typer.Option(None, "--levels", help="Uniform bisection levels, e.g. 0-5 or 1,3,5")
QUAD_DEGREE = typer.Option(None, "--quad-degree", help="Override the volume quadrature degree")
CG_TOL = typer.Option(None, "--cg-tol", help="Relative CG residual tolerance")
OUT = typer.Option(None, "--out", "-o", help="Output file (default: stdout)")
SEED = typer.Option(None, "--seed", help="Seed for gradient check points and the oracle's completion stress run")
WORKERS = typer.Option(None, "--workers", help="Threads for local error evaluations")
DEBUG = typer.Option(False, "--debug", help="Show debug logs")
LOG_FILE = typer.Option(None, "--log-file", help="Also write logs to this file")


@app.command()
def rates(
    function: Optional[str] = FUNCTION,
    degree: Optional[int] = DEGREE,
    bc: Optional[str] = BC,
    mesh: Optional[str] = MESH,
    levels: Optional[str] = LEVELS,
    quad_degree: Optional[int] = QUAD_DEGREE,
    cg_tol: Optional[float] = CG_TOL,
    out: Optional[str] = OUT,
    seed: Optional[int] = SEED,
    workers: Optional[int] = WORKERS,
    debug: bool = DEBUG,
    log_file: Optional[str] = LOG_FILE,
):
    """
    Convergence under uniform bisection.

    CSV columns: level,h,elements,dofs,E,local_sum,ratio,status,apriori_bound,eoc
    """
    def action():
        config = build_config(
            "rates", debug, log_file, function=function, degree=degree, bc=bc, mesh=mesh,
            levels=parse_levels(levels), quad_degree=quad_degree, cg_tol=cg_tol, out=out,
            seed=seed, workers=workers,
        )
        rows = run_rates(config)
        output.write_csv(rows, RATE_COLUMNS, config.out)
        if config.out:
            show_rows(f"{config.function}, degree {config.degree}", rows, RATE_COLUMNS)

    run_command(action, debug)


@app.command()
def decouple(
    function: Optional[str] = FUNCTION,
    degree: Optional[int] = DEGREE,
    bc: Optional[str] = BC,
    mesh: Optional[str] = MESH,
    levels: Optional[str] = LEVELS,
    quad_degree: Optional[int] = QUAD_DEGREE,
    cg_tol: Optional[float] = CG_TOL,
    out: Optional[str] = OUT,
    seed: Optional[int] = SEED,
    workers: Optional[int] = WORKERS,
    coefficients: Optional[str] = typer.Option(
        None,
        "--coefficients",
        help="Write dof_id,x,y,value of the Ritz projection on the finest level"
    ),
    debug: bool = DEBUG,
    log_file: Optional[str] = LOG_FILE,
):
    """
    Global error against the sum of local errors.

    CSV columns: level,elements,dofs,local_sum,E,ratio,status,partial_ratio,
    interp_error,max_delta,theoretical_constant
    """
    def action():
        config = build_config(
            "decouple", debug, log_file, function=function, degree=degree, bc=bc, mesh=mesh,
            levels=parse_levels(levels), quad_degree=quad_degree, cg_tol=cg_tol, out=out,
            seed=seed, workers=workers,
        )
        run = run_decoupling(config)
        output.write_csv(run.rows, DECOUPLE_COLUMNS, config.out)
        if config.out:
            output.write_jsonl(run.records, output.jsonl_path(config.out))
            show_rows(f"{config.function}, degree {config.degree}", run.rows, DECOUPLE_COLUMNS)
        if coefficients:
            output.coefficient_csv(run.coefficients, coefficients)

    run_command(action, debug)


@app.command()
def tree(
    function: Optional[str] = FUNCTION,
    degree: Optional[int] = DEGREE,
    bc: Optional[str] = BC,
    mesh: Optional[str] = MESH,
    variant: Optional[str] = typer.Option(None, "--variant", help="threshold | budget"),
    thresholds: Optional[str] = typer.Option(None, "--thresholds", help="Comma list of thresholds t"),
    budget: Optional[str] = typer.Option(None, "--budget", help="Comma list of element budgets N"),
    compare_uniform: bool = typer.Option(
        False,
        "--compare-uniform",
        help="Add uniform refinement rows for --levels"
    ),
    levels: Optional[str] = LEVELS,
    quad_degree: Optional[int] = QUAD_DEGREE,
    cg_tol: Optional[float] = CG_TOL,
    out: Optional[str] = OUT,
    seed: Optional[int] = SEED,
    workers: Optional[int] = WORKERS,
    debug: bool = DEBUG,
    log_file: Optional[str] = LOG_FILE,
):
    """
    Adaptive tree approximation.

    CSV columns: variant,parameter,elements,leaves,E,broken_error. With --out
    the run log is written next to the CSV with suffix .jsonl.
    """
    def action():
        config = build_config(
            "tree", debug, log_file, function=function, degree=degree, bc=bc, mesh=mesh,
            variant=variant, thresholds=parse_list(thresholds, float, "thresholds"),
            budgets=parse_list(budget, int, "budget"), compare_uniform=compare_uniform or None,
            levels=parse_levels(levels), quad_degree=quad_degree, cg_tol=cg_tol, out=out,
            seed=seed, workers=workers,
        )
        run = run_tree(config)
        output.write_csv(run.rows, TREE_COLUMNS, config.out)
        if config.out:
            output.write_jsonl(run.records, output.jsonl_path(config.out))
            show_rows(f"{config.function}, {config.variant}", run.rows, TREE_COLUMNS)
        if run.slope is not None:
            console.print(f"[green]log-log slope of E against #M:[/green] {run.slope:.4f}")
        if run.uniform_slope is not None:
            console.print(f"[green]uniform refinement slope:[/green] {run.uniform_slope:.4f}")

    run_command(action, debug)


@app.command()
def oracle(
    function: Optional[str] = FUNCTION,
    degree: Optional[int] = DEGREE,
    bc: Optional[str] = BC,
    mesh: Optional[str] = MESH,
    thresholds: Optional[str] = typer.Option(None, "--thresholds", help="Comma list of thresholds t"),
    quad_degree: Optional[int] = QUAD_DEGREE,
    cg_tol: Optional[float] = CG_TOL,
    out: Optional[str] = OUT,
    seed: Optional[int] = SEED,
    debug: bool = DEBUG,
    log_file: Optional[str] = LOG_FILE,
):
    """
    Compare threshold meshes with the best broken error over all subtrees.

    Refuses meshes more than 12 bisections away from the initial mesh.
    """
    def action():
        config = build_config(
            "oracle", debug, log_file, function=function, degree=degree, bc=bc, mesh=mesh,
            thresholds=parse_list(thresholds, float, "thresholds"), quad_degree=quad_degree,
            cg_tol=cg_tol, out=out, seed=seed,
        )
        report = run_oracle(config)
        output.write_json(report, config.out)
        if report["C1_realized"] is not None:
            console.print(f"[green]realized C1:[/green] {report['C1_realized']:.4f}")

    run_command(action, debug)


@app.command("mesh-info")
def mesh_info_command(
    mesh: Optional[str] = MESH,
    levels: Optional[str] = LEVELS,
    out: Optional[str] = OUT,
    debug: bool = DEBUG,
    log_file: Optional[str] = LOG_FILE,
):
    """
    Size, shape and connectivity of a mesh after the largest requested level.
    """
    def action():
        config = build_config("mesh-info", debug, log_file, mesh=mesh, levels=parse_levels(levels), out=out)
        info = mesh_info(config)
        table = Table(title=f"{config.mesh}, level {info['level']}")
        table.add_column("quantity")
        table.add_column("value", justify="right")
        for key, value in info.items():
            table.add_row(key, _short(value))
        console.print(table)
        if config.out:
            output.write_json(info, config.out)

    run_command(action, debug)


if __name__ == "__main__":
    app()
