"""Numerical utilities shared by the approximation modules."""

from gradfit.utils.solvers import CGResult, pcg

__all__ = ["CGResult", "pcg"]
