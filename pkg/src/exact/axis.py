"""The axis chain: the walk on K^c, stopped at its first step into the cone.

Each arm is a birth-death chain on 1..R-1 (outward q_i, inward 1-3q_i, cone exit 2q_i,
killed beyond R-1); the four arms only talk to each other through the origin. The
Green function of one arm with the origin made absorbing is obtained by a banded solve,
and the full four-arm Green function follows from the renewal at the origin.

Green rows (and the exit laws built on them) come from products of one-level crossing
probabilities instead: far entries are products of many small factors, which a linear
solve only resolves to absolute precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.linalg import solve_banded

from src.errors import PreconditionError
from src.exact.measure import EmpiricalMeasure
from src.logs import get_logger
from src.walk.lattice import ARMS, Arm, Region, WalkParams, classify

logger = get_logger(__name__)


@dataclass
class AxisSolveResult:
    absorption_law: EmpiricalMeasure
    expected_rho: float
    expected_rho_sq: float
    origin_visits: float
    survival: Dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {
            "absorption_law": self.absorption_law.to_dict(),
            "deficit": self.absorption_law.deficit,
            "expected_rho": self.expected_rho,
            "expected_rho_sq": self.expected_rho_sq,
            "origin_visits": self.origin_visits,
            "survival": [[m, p] for m, p in sorted(self.survival.items())],
        }


class AxisChain:
    """Four-arm axis chain truncated at max-norm R (sites with max-norm >= R are killed).

    Per-start quantities are returned as arrays indexed by the distance d of the start
    to the origin (d = 0 is the origin); by symmetry they do not depend on the arm.
    """

    def __init__(self, params: WalkParams, R: int):
        if R < 2:
            raise PreconditionError(f"truncation radius R must be >= 2, got {R}")
        self.params = params
        self.R = int(R)
        self.n = self.R - 1
        i = np.arange(1, self.n + 1, dtype=float)
        self.sites = i
        self.q = 0.25 * np.exp(-params.alpha * np.log(i))
        self.inward = 1.0 - 3.0 * self.q
        self.arm_green = self._arm_green()
        # probability of reaching the origin before leaving the arm, per start
        self.to_origin = self.inward[0] * self.arm_green[:, 0]
        self.origin_return = float(self.to_origin[0])
        g0 = np.empty(self.n + 1)
        g0[0] = 1.0 / (1.0 - self.origin_return)
        g0[1:] = self.to_origin * g0[0]
        self.origin_green = g0
        self.from_origin = 0.25 * self.arm_green[0, :]
        self.log_up, self.log_down, self.diagonal = self._crossings()
        self._rho: Optional[np.ndarray] = None
        logger.debug("axis chain alpha=%s R=%d: origin return %.6f", params.alpha, R, self.origin_return)

    def _arm_green(self) -> np.ndarray:
        n = self.n
        ab = np.zeros((3, n))
        ab[0, 1:] = -self.q[:-1]
        ab[1, :] = 1.0
        ab[2, :-1] = -self.inward[1:]
        return solve_banded((1, 1), ab, np.eye(n))

    def _crossings(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Cumulative log crossing probabilities and the diagonal G(z, z) per distance.

        up_k = P_k(T_{k+1} < rho) (k = 0 is the origin, k+1 a fixed arm) and
        down_k = P_k(T_{k-1} < rho). Returns (log_up, log_down, diagonal) with
        log_up[j] = log P_0(T_j < rho) and log_down[i] = log P_i(T_0 < rho).
        """
        n, q, inward = self.n, self.q, self.inward
        down = np.zeros(n + 2)
        down[n] = inward[n - 1]
        for k in range(n - 1, 0, -1):
            down[k] = inward[k - 1] / (1.0 - q[k - 1] * down[k + 1])
        up = np.empty(n)
        up[0] = 0.25 / (1.0 - 0.75 * down[1])
        for k in range(1, n):
            up[k] = q[k - 1] / (1.0 - inward[k - 1] * up[k - 1])
        k = np.arange(1, n + 1)
        diagonal = np.empty(n + 1)
        diagonal[0] = 1.0 / (1.0 - down[1])
        diagonal[1:] = 1.0 / (1.0 - inward * up[k - 1] - q * down[k + 1])
        log_up = np.concatenate(([0.0], np.cumsum(np.log(up))))
        log_down = np.concatenate(([0.0], np.cumsum(np.log(down[1 : n + 1]))))
        return log_up, log_down, diagonal

    def log_hitting(self, arm_x: Optional[Arm], i: int, arm_y: Optional[Arm], j: int) -> float:
        """log P_x(T_y < rho) for the axis sites x = (arm_x, i) and y = (arm_y, j); distance 0 is the origin."""
        if j == 0:
            return float(self.log_down[i])
        if i == 0 or arm_x is not arm_y:
            return float(self.log_down[i] + self.log_up[j])
        if j >= i:
            return float(self.log_up[j] - self.log_up[i])
        return float(self.log_down[i] - self.log_down[j])

    def log_green(self, x: Tuple[int, int], y: Tuple[int, int]) -> float:
        """log G(x, y), to relative precision however far apart x and y are."""
        arm_x, i = _locate(x, self.R)
        arm_y, j = _locate(y, self.R)
        return self.log_hitting(arm_x, i, arm_y, j) + math.log(self.diagonal[j])

    def log_exit_mass(self, x: Tuple[int, int], y: Tuple[int, int]) -> float:
        """log P_x(X_rho = y') for either cone side y' of the arm site y."""
        _, j = _locate(y, self.R)
        if j == 0:
            raise PreconditionError("the origin has no cone side")
        return self.log_green(x, y) + math.log(self.q[j - 1])

    def accumulate(self, w_arm: np.ndarray, w_origin: float = 0.0) -> np.ndarray:
        """E_d[sum of w over the visited axis sites before rho], for every start distance d."""
        w_arm = np.asarray(w_arm, dtype=float)
        per_origin_visit = w_origin + 4.0 * float(self.from_origin @ w_arm)
        out = self.origin_green * per_origin_visit
        out[1:] += self.arm_green @ w_arm
        return out

    @property
    def expected_rho(self) -> np.ndarray:
        if self._rho is None:
            self._rho = self.accumulate(np.ones(self.n), 1.0)
        return self._rho

    @property
    def expected_rho_sq(self) -> np.ndarray:
        h = self.expected_rho
        return self.accumulate(2.0 * h[1:] - 1.0, 2.0 * h[0] - 1.0)

    @property
    def origin_visits(self) -> np.ndarray:
        return self.origin_green.copy()

    @property
    def exit_probability(self) -> np.ndarray:
        return self.accumulate(2.0 * self.q)

    @property
    def deficit(self) -> np.ndarray:
        w = np.zeros(self.n)
        w[-1] = self.q[-1]
        return self.accumulate(w)

    def exit_norm_moment(self, beta: float = 1.0) -> np.ndarray:
        """E_d[max_norm(X_rho)^beta]; an exit from the arm site i has max-norm i."""
        return self.accumulate(2.0 * self.q * self.sites ** beta)

    def green_row(self, arm: Optional[Arm], d: int) -> Tuple[float, np.ndarray]:
        """Expected visits to the origin and to every arm site, from the start (arm, d).

        The arm rows follow the order of ARMS.
        """
        j = np.arange(1, self.n + 1)
        diag = self.diagonal[1:]
        arms = np.tile(np.exp(self.log_down[d] + self.log_up[1:]) * diag, (4, 1))
        if d > 0:
            own = np.where(j >= d, self.log_up[j] - self.log_up[d], self.log_down[d] - self.log_down[j])
            arms[ARMS.index(arm)] = np.exp(own) * diag
        return float(np.exp(self.log_down[d]) * self.diagonal[0]), arms

    def green_diagonal(self, d: int) -> float:
        """G(z, z) for an arm site z at distance d >= 1."""
        return float(self.diagonal[d])

    def return_probability(self, d: int) -> float:
        """P_z(T_z < rho) for an arm site z at distance d."""
        return 1.0 - 1.0 / self.green_diagonal(d)

    def exit_law(self, arm: Optional[Arm], d: int) -> EmpiricalMeasure:
        _, arms = self.green_row(arm, d)
        sites, masses = [], []
        for b, row in zip(ARMS, arms):
            flux = row * self.q
            for i in range(1, self.n + 1):
                for side in b.cone_sides(i):
                    sites.append(side)
                    masses.append(flux[i - 1])
        return EmpiricalMeasure.from_arrays(sites, masses, deficit=float(self.deficit[d]))

    def survival(self, arm: Optional[Arm], d: int, horizon: int) -> np.ndarray:
        """P(rho > m) for m = 0..horizon, by iterating the substochastic kernel (killed mass removed)."""
        arms = np.zeros((4, self.n))
        if d > 0:
            arms[ARMS.index(arm), d - 1] = 1.0
        return self.survival_from(1.0 if d == 0 else 0.0, arms, horizon)

    def survival_from(self, origin: float, arms: np.ndarray, horizon: int) -> np.ndarray:
        """P(rho > m) for an initial law given as origin mass plus a (4, R-1) array of arm masses."""
        arms = np.array(arms, dtype=float)
        out = np.empty(horizon + 1)
        out[0] = origin + float(arms.sum())
        for m in range(1, horizon + 1):
            inward = arms * self.inward
            outward = arms * self.q
            new = np.zeros_like(arms)
            new[:, :-1] += inward[:, 1:]
            new[:, 1:] += outward[:, :-1]
            new[:, 0] += 0.25 * origin
            origin = float(inward[:, 0].sum())
            arms = new
            out[m] = origin + float(arms.sum())
        return out


@lru_cache(maxsize=16)
def axis_chain(alpha: float, R: int) -> AxisChain:
    return AxisChain(WalkParams(alpha=alpha), R)


def _locate(start: Tuple[int, int], R: int) -> Tuple[Optional[Arm], int]:
    kind = classify(start)
    if kind.region is Region.CONE:
        raise PreconditionError(f"axis absorption starts on K^c, got {tuple(start)}")
    if kind.i >= R:
        raise PreconditionError(f"start {tuple(start)} lies outside the truncation radius R={R}")
    return kind.arm, kind.i


def axis_absorption(start: Tuple[int, int], alpha: float, R: int, M: int = 0) -> AxisSolveResult:
    """Law of X_rho and the moments of rho from an axis start, truncated at radius R."""
    if R < 2:
        raise PreconditionError(f"truncation radius R must be >= 2, got {R}")
    arm, d = _locate(start, R)
    chain = axis_chain(float(alpha), int(R))
    survival = {}
    if M > 0:
        survival = {m: float(p) for m, p in enumerate(chain.survival(arm, d, M))}
    return AxisSolveResult(
        absorption_law=chain.exit_law(arm, d),
        expected_rho=float(chain.expected_rho[d]),
        expected_rho_sq=float(chain.expected_rho_sq[d]),
        origin_visits=float(chain.origin_visits[d]),
        survival=survival,
    )
