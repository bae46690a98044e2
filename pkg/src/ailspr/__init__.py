"""Adaptive iterated local search with Path-Relinking for the capacitated VRP."""

from .instance import Instance, ParseError, build_neighbors, parse_cvrplib, read_instance
from .solution import Solution, gap, is_feasible, sym_distance
from .solver import Params, RunResult, load_params, run_ails, run_ails_pr, solve

__all__ = [
    "Instance",
    "Params",
    "ParseError",
    "RunResult",
    "Solution",
    "build_neighbors",
    "gap",
    "is_feasible",
    "load_params",
    "parse_cvrplib",
    "read_instance",
    "run_ails",
    "run_ails_pr",
    "solve",
    "sym_distance",
]
