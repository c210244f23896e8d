"""Deterministic solvers: axis absorption, cone exit laws, embedded invariant laws, constants."""
from src.exact.axis import AxisChain, AxisSolveResult, axis_absorption, axis_chain
from src.exact.cone import ConeExitResult, cone_exit, cone_exit_kernel
from src.exact.constants import constants
from src.exact.identities import reverse_sum, reversibility_residual
from src.exact.invariant import embedded_invariant, solve_invariants
from src.exact.measure import EmpiricalMeasure
from src.exact.paths import shortest_path_prob

__all__ = [
    "AxisChain",
    "AxisSolveResult",
    "ConeExitResult",
    "EmpiricalMeasure",
    "axis_absorption",
    "axis_chain",
    "cone_exit",
    "cone_exit_kernel",
    "constants",
    "embedded_invariant",
    "reverse_sum",
    "reversibility_residual",
    "shortest_path_prob",
    "solve_invariants",
]
