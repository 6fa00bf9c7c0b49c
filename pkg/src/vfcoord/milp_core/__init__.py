"""Desk-scale exact LP/MILP engine."""

from .bnb import MipResult, solve_mip
from .builder import EQ, GE, LE, MilpBuilder
from .config import DEFAULT_CONFIG, SolverConfig
from .simplex import LpSolution, NumericalFailure, ProblemTooLarge, Status, format_basis, solve_lp
from .standard import MilpSolution, ParamEntry, StandardMilp, solve_lp_fixed_binaries, solve_milp

__all__ = [
    "DEFAULT_CONFIG", "EQ", "GE", "LE", "LpSolution", "MilpBuilder", "MilpSolution", "MipResult",
    "NumericalFailure", "ParamEntry", "ProblemTooLarge", "SolverConfig", "StandardMilp", "Status",
    "format_basis", "solve_lp", "solve_lp_fixed_binaries", "solve_milp", "solve_mip",
]
