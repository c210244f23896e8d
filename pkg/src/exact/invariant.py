"""Invariant laws of the embedded chains X_{eta_i} (axis entries) and X_{rho_i} (cone entries).

The entry chain moves by the axis exit law A (axis site -> cone boundary) followed by
the cone exit law C (cone boundary -> axis site); the exit chain moves by C then A.
Both kernels are assembled on the sites of max-norm < R and the fixed point is found by
power iteration, renormalising away the mass lost to truncation at every step.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Literal, Optional

import numpy as np

from src.errors import NonConvergenceError, PreconditionError
from src.exact.axis import AxisChain, axis_chain
from src.exact.measure import EmpiricalMeasure
from src.exact.quadrant import quadrant_kernel
from src.logs import get_logger
from src.walk.lattice import ARMS, ORIGIN, LatticePoint, max_norm

logger = get_logger(__name__)

QUADRANTS = ((1, 1), (-1, 1), (1, -1), (-1, -1))
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000


@dataclass
class EmbeddedKernels:
    axis_sites: List[LatticePoint]
    boundary_sites: List[LatticePoint]
    axis_to_boundary: np.ndarray
    boundary_to_axis: np.ndarray
    axis_distance: np.ndarray
    boundary_norm: np.ndarray


def _axis_index(n: int, arm_index: int, i: int) -> int:
    return 1 + arm_index * n + (i - 1)


def build_kernels(chain: AxisChain, T: Optional[int] = None) -> EmbeddedKernels:
    n = chain.n
    axis_sites = [ORIGIN] + [arm.site(i) for arm in ARMS for i in range(1, n + 1)]
    boundary_sites: List[LatticePoint] = []
    for s1, s2 in QUADRANTS:
        boundary_sites += [LatticePoint(s1 * a, s2) for a in range(1, n + 1)]
        boundary_sites += [LatticePoint(s1, s2 * b) for b in range(2, n + 1)]
    b_index: Dict[LatticePoint, int] = {s: k for k, s in enumerate(boundary_sites)}

    # column indices of the two cone sides of every arm site, per arm
    sides = []
    for arm in ARMS:
        first, second = zip(*(arm.cone_sides(i) for i in range(1, n + 1)))
        sides.append((np.array([b_index[s] for s in first]), np.array([b_index[s] for s in second])))

    A = np.zeros((len(axis_sites), len(boundary_sites)))
    starts = [(None, 0)] + [(arm, i) for arm in ARMS for i in range(1, n + 1)]
    for row, (arm, d) in enumerate(starts):
        _, green = chain.green_row(arm, d)
        for k, flux in enumerate(green * chain.q):
            first, second = sides[k]
            A[row, first] += flux
            A[row, second] += flux

    kernel = quadrant_kernel(chain.R, T)
    arm_of = {(1, 0): 0, (-1, 0): 1, (0, 1): 2, (0, -1): 3}
    C = np.zeros((len(boundary_sites), len(axis_sites)))
    cols = np.arange(1, n + 1)
    for row, y in enumerate(boundary_sites):
        s1 = 1 if y.x1 > 0 else -1
        s2 = 1 if y.x2 > 0 else -1
        if abs(y.x2) == 1:
            horizontal, vertical = kernel.row(abs(y.x1))
        else:
            vertical, horizontal = kernel.row(abs(y.x2))
        C[row, _axis_index(n, arm_of[(s1, 0)], cols)] = horizontal
        C[row, _axis_index(n, arm_of[(0, s2)], cols)] = vertical

    return EmbeddedKernels(
        axis_sites=axis_sites,
        boundary_sites=boundary_sites,
        axis_to_boundary=A,
        boundary_to_axis=C,
        axis_distance=np.array([max_norm(s) for s in axis_sites]),
        boundary_norm=np.array([max_norm(s) for s in boundary_sites], dtype=float),
    )


@dataclass
class InvariantPair:
    alpha: float
    R: int
    entry: np.ndarray
    exit: np.ndarray
    kernels: EmbeddedKernels
    iterations: int
    leak: float
    entry_residual: float
    exit_residual: float

    def entry_measure(self) -> EmpiricalMeasure:
        return EmpiricalMeasure.from_arrays(self.kernels.axis_sites, self.entry)

    def exit_measure(self) -> EmpiricalMeasure:
        return EmpiricalMeasure.from_arrays(self.kernels.boundary_sites, self.exit)


def _normalise(v: np.ndarray) -> np.ndarray:
    return v / v.sum()


@lru_cache(maxsize=8)
def solve_invariants(
    alpha: float,
    R: int,
    T: Optional[int] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> InvariantPair:
    """Fixed points of both embedded chains on the sites of max-norm < R."""
    if alpha <= 1:
        raise PreconditionError(f"embedded chains need alpha > 1, got {alpha}")
    if R < 20:
        raise PreconditionError(f"embedded chains need R >= 20, got {R}")
    kernels = build_kernels(axis_chain(float(alpha), int(R)), T)
    A, C = kernels.axis_to_boundary, kernels.boundary_to_axis
    pi = np.full(len(kernels.axis_sites), 1.0 / len(kernels.axis_sites))
    leak = 0.0
    for iteration in range(1, max_iter + 1):
        nxt = (pi @ A) @ C
        mass = nxt.sum()
        leak = 1.0 - mass
        nxt /= mass
        tv = 0.5 * np.abs(nxt - pi).sum()
        pi = nxt
        if tv < tol:
            break
    else:
        raise NonConvergenceError(
            f"entry chain did not converge in {max_iter} iterations (alpha={alpha}, R={R}); "
            "increase R or the iteration cap"
        )
    exit_law = _normalise(pi @ A)
    entry_residual = float(np.abs(_normalise((pi @ A) @ C) - pi).sum())
    exit_residual = float(np.abs(_normalise((exit_law @ C) @ A) - exit_law).sum())
    logger.info(
        "embedded chains alpha=%s R=%d: %d iterations, leak %.3e, residuals %.2e / %.2e",
        alpha, R, iteration, leak, entry_residual, exit_residual,
    )
    return InvariantPair(
        alpha=float(alpha),
        R=int(R),
        entry=pi,
        exit=exit_law,
        kernels=kernels,
        iterations=iteration,
        leak=float(leak),
        entry_residual=entry_residual,
        exit_residual=exit_residual,
    )


def embedded_invariant(
    chain: Literal["entry", "exit"],
    alpha: float,
    R: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> EmpiricalMeasure:
    """pi* (chain="entry", law of X_{eta_i}) or pi-dagger (chain="exit", law of X_{rho_i})."""
    if chain not in ("entry", "exit"):
        raise PreconditionError(f"chain must be 'entry' or 'exit', got {chain!r}")
    pair = solve_invariants(float(alpha), int(R), None, float(tol), int(max_iter))
    return pair.entry_measure() if chain == "entry" else pair.exit_measure()
