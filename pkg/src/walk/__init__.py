"""The perturbed walk itself: kernel, random streams, functionals and the excursion engine."""
from src.walk.excursions import ExcursionEngine, ExcursionRecord, RunStats, run_walk, theorem_estimates
from src.walk.functionals import Functional, builtin_functionals, get_functionals
from src.walk.lattice import (
    ARMS,
    ORIGIN,
    START,
    Arm,
    LatticePoint,
    Region,
    RegionKind,
    TransitionDist,
    WalkParams,
    classify,
    max_norm,
    step,
    transition_distribution,
)
from src.walk.rng import RandomSource

__all__ = [
    "ARMS",
    "ORIGIN",
    "START",
    "Arm",
    "ExcursionEngine",
    "ExcursionRecord",
    "Functional",
    "LatticePoint",
    "RandomSource",
    "Region",
    "RegionKind",
    "RunStats",
    "TransitionDist",
    "WalkParams",
    "builtin_functionals",
    "classify",
    "get_functionals",
    "max_norm",
    "run_walk",
    "step",
    "theorem_estimates",
    "transition_distribution",
]
