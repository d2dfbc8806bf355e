"""Exact scheduling of job families on parallel machines with qualification
time constraints, minimizing flow time then disqualifications."""

from .instance import Family, GenConfig, Instance, generate_instance, load_instance, save_instance
from .relaxation import BACKEND, JobGroup, sequence_optimal
from .schedule import Schedule, check_validity, count_disqualifications, flowtime, left_pack
from .solver import SolveResult, SolverConfig, solve, solve_lex, solve_weighted

__all__ = [
    "BACKEND",
    "Family",
    "GenConfig",
    "Instance",
    "JobGroup",
    "Schedule",
    "SolveResult",
    "SolverConfig",
    "check_validity",
    "count_disqualifications",
    "flowtime",
    "generate_instance",
    "left_pack",
    "load_instance",
    "save_instance",
    "sequence_optimal",
    "solve",
    "solve_lex",
    "solve_weighted",
]
