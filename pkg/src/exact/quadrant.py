"""Closed-form Green function of the simple random walk in the quadrant box [1, R-1]^2.

The walk is killed on the axes (coordinate 0) and beyond the box (coordinate R). The
one-dimensional Dirichlet problem is diagonalised by the discrete sine basis, so the
two-dimensional Green function restricted to the boundary rows is a product of small
dense matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from src.errors import PreconditionError


@dataclass(frozen=True)
class QuadrantKernel:
    """Cone exit kernel from the boundary row of the first quadrant.

    `horizontal[a-1, c-1]` is P_{(a,1)}(eta <= T, X_eta = (c,0)) and `vertical[a-1, c-1]` is
    P_{(a,1)}(eta <= T, X_eta = (0,c)). Starts (1,b) follow by swapping coordinates.
    """

    R: int
    T: Optional[int]
    horizontal: np.ndarray
    vertical: np.ndarray

    @property
    def n(self) -> int:
        return self.R - 1

    def row(self, a: int):
        """(horizontal, vertical) exit masses from (a,1)."""
        return self.horizontal[a - 1], self.vertical[a - 1]

    def deficit(self) -> np.ndarray:
        """Killed (or time-truncated) mass per boundary start (a,1)."""
        return 1.0 - self.horizontal.sum(axis=1) - self.vertical.sum(axis=1)


def _sine_basis(n: int):
    k = np.arange(1, n + 1)
    phi = np.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(k, k) / (n + 1))
    cos = np.cos(np.pi * k / (n + 1))
    return phi, cos


@lru_cache(maxsize=8)
def quadrant_kernel(R: int, T: Optional[int] = None) -> QuadrantKernel:
    """Exit kernel for the box of radius R, counting exits at times <= T (T=None: no time limit)."""
    if R < 2:
        raise PreconditionError(f"quadrant radius R must be >= 2, got {R}")
    n = R - 1
    phi, cos = _sine_basis(n)
    lam = 0.5 * (cos[:, None] + cos[None, :])
    if T is None:
        weights = 1.0 / (1.0 - lam)
    else:
        # sum_{t < T} lam^t; lam^T computed in the log domain where lam > 0
        powered = np.sign(lam) ** T * np.exp(T * np.log(np.abs(lam) + 1e-300))
        weights = (1.0 - powered) / (1.0 - lam)
    edge = phi[0]
    row_weights = weights @ (edge ** 2)
    same = (phi * row_weights) @ phi.T
    cross = phi @ (edge[:, None] * weights * edge[None, :]) @ phi.T
    horizontal = np.clip(0.25 * same, 0.0, None)
    vertical = np.clip(0.25 * cross, 0.0, None)
    return QuadrantKernel(R=R, T=T, horizontal=horizontal, vertical=vertical)
