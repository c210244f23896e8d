from __future__ import annotations

import math
from typing import List, Tuple

from src.errors import PreconditionError
from src.walk.lattice import ORIGIN, LatticePoint, Region, WalkParams, classify


def axis_path(x: Tuple[int, int], y: Tuple[int, int]) -> List[LatticePoint]:
    """The unique shortest path from x to y inside K^c (through the origin across arms)."""
    kx, ky = classify(x), classify(y)
    if kx.region is Region.CONE or ky.region is Region.CONE:
        raise PreconditionError(f"shortest axis paths join axis sites only, got {x} and {y}")
    x, y = LatticePoint(*x), LatticePoint(*y)
    if kx.region is Region.AXIS and ky.region is Region.AXIS and kx.arm is ky.arm:
        arm = kx.arm
        step = 1 if ky.i > kx.i else -1
        return [arm.site(i) for i in range(kx.i, ky.i + step, step)]
    down = [kx.arm.site(i) for i in range(kx.i, 0, -1)] if kx.region is Region.AXIS else []
    up = [ky.arm.site(i) for i in range(1, ky.i + 1)] if ky.region is Region.AXIS else []
    return down + [ORIGIN] + up


def log_shortest_path_prob(x: Tuple[int, int], y: Tuple[int, int], params: WalkParams) -> float:
    """log P(x -> y), summed step by step; P itself underflows for far pairs."""
    path = axis_path(x, y)
    log_p = 0.0
    for a, b in zip(path, path[1:]):
        ka = classify(a)
        if ka.region is Region.ORIGIN:
            p = 0.25
        elif max(abs(b.x1), abs(b.x2)) > ka.i:
            p = params.outward(ka.i)
        else:
            p = params.inward(ka.i)
        log_p += math.log(p)
    return log_p


def shortest_path_prob(x: Tuple[int, int], y: Tuple[int, int], params: WalkParams) -> float:
    """P(x -> y): product of one-step probabilities along the shortest axis path."""
    return math.exp(log_shortest_path_prob(x, y, params))
