from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from src.errors import PreconditionError
from src.exact.measure import EmpiricalMeasure
from src.exact.quadrant import quadrant_kernel
from src.logs import get_logger
from src.walk.lattice import LatticePoint, in_cone, max_norm

logger = get_logger(__name__)


@dataclass
class ConeExitResult:
    """Joint law of (X_eta, eta) for the simple walk started in K and stopped on K^c.

    `site_law.deficit` is the mass that is still alive at T plus the mass killed at
    max-norm R; `time_law[t]` is P(eta = t) for t <= T.
    """

    start: LatticePoint
    R: int
    T: int
    site_law: EmpiricalMeasure
    time_law: np.ndarray
    alive: float
    escaped: float
    tracked: Dict[LatticePoint, np.ndarray] = field(default_factory=dict)

    @property
    def deficit(self) -> float:
        return self.site_law.deficit

    def to_dict(self) -> Dict[str, object]:
        return {
            "start": list(self.start),
            "R": self.R,
            "T": self.T,
            "site_law": self.site_law.to_dict(),
            "deficit": self.deficit,
            "alive": self.alive,
            "escaped": self.escaped,
            "time_law_head": [float(p) for p in self.time_law[: min(len(self.time_law), 1001)]],
            "tracked": {str(s): [float(p) for p in series[:1001]] for s, series in self.tracked.items()},
        }


def _signs(start: Tuple[int, int]) -> Tuple[int, int]:
    return (1 if start[0] > 0 else -1), (1 if start[1] > 0 else -1)


def cone_exit(
    start: Tuple[int, int],
    R: int,
    T: int,
    track: Iterable[Tuple[int, int]] = (),
) -> ConeExitResult:
    """Time-resolved dynamic programme for the quadrant of `start`.

    The walk is killed when a coordinate reaches R in absolute value. `track` lists exit
    sites on K^c whose per-time exit probabilities are kept.
    """
    if not in_cone(start):
        raise PreconditionError(f"cone exit starts in K, got {tuple(start)}")
    if max_norm(start) >= R:
        raise PreconditionError(f"start {tuple(start)} lies outside the truncation radius R={R}")
    if T < 1:
        raise PreconditionError(f"time horizon T must be >= 1, got {T}")
    s1, s2 = _signs(start)
    u1, u2 = abs(start[0]), abs(start[1])
    n = R - 1

    tracked_h: Dict[int, np.ndarray] = {}
    tracked_v: Dict[int, np.ndarray] = {}
    tracked: Dict[LatticePoint, np.ndarray] = {}
    for site in track:
        site = LatticePoint(*site)
        series = np.zeros(T + 1)
        if site.x2 == 0 and site.x1 * s1 > 0:
            tracked_h[abs(site.x1)] = series
        elif site.x1 == 0 and site.x2 * s2 > 0:
            tracked_v[abs(site.x2)] = series
        tracked[site] = series

    # index = coordinate; rows/cols 0 and n+1 are ghost cells collecting exits and kills
    buf = np.zeros((n + 2, n + 2))
    buf[u1, u2] = 1.0
    exits_h = np.zeros(n)
    exits_v = np.zeros(n)
    time_law = np.zeros(T + 1)
    escaped = 0.0
    for t in range(1, T + 1):
        e1 = min(n, u1 + t - 1)
        e2 = min(n, u2 + t - 1)
        view = 0.25 * buf[1 : e1 + 1, 1 : e2 + 1]
        nxt = np.zeros((e1 + 2, e2 + 2))
        nxt[2:, 1:-1] += view
        nxt[:-2, 1:-1] += view
        nxt[1:-1, 2:] += view
        nxt[1:-1, :-2] += view
        out_v = nxt[0, 1 : e2 + 1]
        out_h = nxt[1 : e1 + 1, 0]
        exits_v[:e2] += out_v
        exits_h[:e1] += out_h
        time_law[t] = out_v.sum() + out_h.sum()
        for c, series in tracked_h.items():
            if c <= e1:
                series[t] = out_h[c - 1]
        for c, series in tracked_v.items():
            if c <= e2:
                series[t] = out_v[c - 1]
        if e1 == n:
            escaped += float(nxt[n + 1, 1 : e2 + 1].sum())
            nxt[n + 1, :] = 0.0
        if e2 == n:
            escaped += float(nxt[1 : e1 + 1, n + 1].sum())
            nxt[:, n + 1] = 0.0
        nxt[0, :] = 0.0
        nxt[:, 0] = 0.0
        buf[: e1 + 2, : e2 + 2] = nxt
    alive = float(buf[1 : n + 1, 1 : n + 1].sum())

    c = np.arange(1, n + 1)
    sites = [(s1 * int(a), 0) for a in c] + [(0, s2 * int(b)) for b in c]
    law = EmpiricalMeasure.from_arrays(sites, np.concatenate([exits_h, exits_v]), deficit=alive + escaped)
    logger.debug("cone exit from %s R=%d T=%d: deficit %.3e", tuple(start), R, T, law.deficit)
    return ConeExitResult(LatticePoint(*start), R, T, law, time_law, alive, escaped, tracked)


def boundary_coordinates(y: Tuple[int, int]) -> Tuple[int, int, int, bool]:
    """(s1, s2, a, swapped) such that y is the image of (a,1) (or of (1,a) when swapped)."""
    if not in_cone(y) or min(abs(y[0]), abs(y[1])) != 1:
        raise PreconditionError(f"{tuple(y)} is not on the cone boundary")
    s1, s2 = _signs(y)
    if abs(y[1]) == 1:
        return s1, s2, abs(y[0]), False
    return s1, s2, abs(y[1]), True


def cone_exit_kernel(y: Tuple[int, int], R: int, T: Optional[int] = None) -> EmpiricalMeasure:
    """Law of X_eta from a boundary site y, from the closed-form quadrant Green function."""
    if max_norm(y) >= R:
        raise PreconditionError(f"start {tuple(y)} lies outside the truncation radius R={R}")
    s1, s2, a, swapped = boundary_coordinates(y)
    kernel = quadrant_kernel(int(R), T)
    horizontal, vertical = kernel.row(a)
    c = np.arange(1, kernel.n + 1)
    if swapped:
        # from (1,a): exits to (0,c) follow the horizontal row, exits to (c,0) the vertical one
        horizontal, vertical = vertical, horizontal
    sites = [(s1 * int(k), 0) for k in c] + [(0, s2 * int(k)) for k in c]
    masses = np.concatenate([horizontal, vertical])
    deficit = max(0.0, 1.0 - float(masses.sum()))
    return EmpiricalMeasure.from_arrays(sites, masses, deficit=deficit)
