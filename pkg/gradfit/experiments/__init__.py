"""Target function registry, experiment recipes and result writers."""

from gradfit.experiments.registry import (
    FunctionRegistryEntry,
    exact_seminorm,
    function_names,
    get_entry,
    registry,
)

__all__ = [
    "FunctionRegistryEntry",
    "exact_seminorm",
    "function_names",
    "get_entry",
    "registry",
]
