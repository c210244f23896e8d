"""State space, regions and the one-step kernel of the axis-perturbed walk on Z^2."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from src.errors import PreconditionError

ROW_SUM_TOLERANCE = 1e-12


class LatticePoint(NamedTuple):
    x1: int
    x2: int

    @classmethod
    def parse(cls, text: str) -> "LatticePoint":
        """Parse an "x1,x2" pair."""
        try:
            a, b = text.split(",")
            return cls(int(a), int(b))
        except ValueError as exc:
            raise PreconditionError(f"not a lattice point: {text!r} (expected 'x1,x2')") from exc

    def __str__(self) -> str:
        return f"{self.x1},{self.x2}"


ORIGIN = LatticePoint(0, 0)
START = LatticePoint(1, 1)


class Arm(str, enum.Enum):
    PLUS_X1 = "+x1"
    MINUS_X1 = "-x1"
    PLUS_X2 = "+x2"
    MINUS_X2 = "-x2"

    def site(self, i: int) -> LatticePoint:
        return {
            Arm.PLUS_X1: LatticePoint(i, 0),
            Arm.MINUS_X1: LatticePoint(-i, 0),
            Arm.PLUS_X2: LatticePoint(0, i),
            Arm.MINUS_X2: LatticePoint(0, -i),
        }[self]

    def cone_sides(self, i: int) -> Tuple[LatticePoint, LatticePoint]:
        """The two cone neighbours of the arm site at distance i, in sampling order."""
        p = self.site(i)
        if self in (Arm.PLUS_X1, Arm.MINUS_X1):
            return LatticePoint(p.x1, 1), LatticePoint(p.x1, -1)
        return LatticePoint(1, p.x2), LatticePoint(-1, p.x2)


ARMS = (Arm.PLUS_X1, Arm.MINUS_X1, Arm.PLUS_X2, Arm.MINUS_X2)


class Region(str, enum.Enum):
    CONE = "cone"
    AXIS = "axis"
    ORIGIN = "origin"


@dataclass(frozen=True)
class RegionKind:
    region: Region
    arm: Optional[Arm] = None
    i: int = 0

    @property
    def on_axis(self) -> bool:
        """True on K^c, origin included."""
        return self.region is not Region.CONE


class WalkParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(..., ge=0)

    def outward(self, i: int) -> float:
        """p((i,0),(i+1,0)) = 1/(4 i^alpha); also the probability of each cone-side move."""
        if i <= 0:
            return 0.25
        return 0.25 * math.exp(-self.alpha * math.log(i))

    def inward(self, i: int) -> float:
        return 1.0 - 3.0 * self.outward(i)


@dataclass(frozen=True)
class TransitionDist:
    outcomes: Tuple[Tuple[LatticePoint, float], ...]

    def __iter__(self) -> Iterator[Tuple[LatticePoint, float]]:
        return iter(self.outcomes)

    def __len__(self) -> int:
        return len(self.outcomes)

    def prob(self, site: LatticePoint) -> float:
        return sum(p for q, p in self.outcomes if q == site)

    def total(self) -> float:
        return math.fsum(p for _, p in self.outcomes)

    def as_dict(self):
        return {q: p for q, p in self.outcomes}


def max_norm(p: Tuple[int, int]) -> int:
    return max(abs(p[0]), abs(p[1]))


def in_cone(p: Tuple[int, int]) -> bool:
    return p[0] != 0 and p[1] != 0


def on_cone_boundary(p: Tuple[int, int]) -> bool:
    """p is in K with max-norm distance 1 to the axes."""
    return in_cone(p) and min(abs(p[0]), abs(p[1])) == 1


def classify(p: Tuple[int, int]) -> RegionKind:
    x1, x2 = p
    if x1 != 0 and x2 != 0:
        return RegionKind(Region.CONE)
    if x1 == 0 and x2 == 0:
        return RegionKind(Region.ORIGIN)
    if x2 == 0:
        return RegionKind(Region.AXIS, Arm.PLUS_X1 if x1 > 0 else Arm.MINUS_X1, abs(x1))
    return RegionKind(Region.AXIS, Arm.PLUS_X2 if x2 > 0 else Arm.MINUS_X2, abs(x2))


def transition_distribution(p: Tuple[int, int], params: WalkParams) -> TransitionDist:
    """One-step law at p.

    Outcomes are listed in sampling order: (+x1, -x1, +x2, -x2), except that on an axis
    arm the inward move is moved to the end.
    """
    x1, x2 = p
    neighbours = [
        LatticePoint(x1 + 1, x2),
        LatticePoint(x1 - 1, x2),
        LatticePoint(x1, x2 + 1),
        LatticePoint(x1, x2 - 1),
    ]
    kind = classify(p)
    if kind.region is not Region.AXIS:
        return TransitionDist(tuple((q, 0.25) for q in neighbours))
    q_out = params.outward(kind.i)
    inward_index = {Arm.PLUS_X1: 1, Arm.MINUS_X1: 0, Arm.PLUS_X2: 3, Arm.MINUS_X2: 2}[kind.arm]
    inward = neighbours.pop(inward_index)
    outcomes = [(q, q_out) for q in neighbours]
    outcomes.append((inward, 1.0 - 3.0 * q_out))
    return TransitionDist(tuple(outcomes))


def sample_move(x1: int, x2: int, u: float, q_out: float) -> Tuple[int, int]:
    """Inverse-CDF step from (x1, x2) given a uniform draw u.

    `q_out` is the outward probability of the current axis arm site; it is ignored on
    the cone and at the origin. This is the kernel used by the excursion engine.
    """
    if (x1 != 0 and x2 != 0) or (x1 == 0 and x2 == 0):
        if u < 0.25:
            return x1 + 1, x2
        if u < 0.5:
            return x1 - 1, x2
        if u < 0.75:
            return x1, x2 + 1
        return x1, x2 - 1
    if x2 == 0:
        # horizontal arm: outward, then the two cone sides, inward last
        s = 1 if x1 > 0 else -1
        if u < q_out:
            return (x1 + 1, x2) if s > 0 else (x1 - 1, x2)
        if u < 2.0 * q_out:
            return x1, x2 + 1
        if u < 3.0 * q_out:
            return x1, x2 - 1
        return x1 - s, x2
    s = 1 if x2 > 0 else -1
    if u < q_out:
        return x1 + 1, x2
    if u < 2.0 * q_out:
        return x1 - 1, x2
    if u < 3.0 * q_out:
        return (x1, x2 + 1) if s > 0 else (x1, x2 - 1)
    return x1, x2 - s


def step(p: Tuple[int, int], params: WalkParams, rng) -> LatticePoint:
    """Sample X_{k+1} given X_k = p, consuming one uniform draw from `rng`."""
    u = rng.random()
    kind = classify(p)
    q_out = params.outward(kind.i) if kind.region is Region.AXIS else 0.25
    return LatticePoint(*sample_move(p[0], p[1], u, q_out))


def neighbours(p: Tuple[int, int]) -> Tuple[LatticePoint, ...]:
    x1, x2 = p
    return (
        LatticePoint(x1 + 1, x2),
        LatticePoint(x1 - 1, x2),
        LatticePoint(x1, x2 + 1),
        LatticePoint(x1, x2 - 1),
    )


def dihedral_images(p: Tuple[int, int]) -> Tuple[LatticePoint, ...]:
    """The eight images of p under the symmetries of Z^2."""
    x1, x2 = p
    out = []
    for a, b in ((x1, x2), (x2, x1)):
        for s1 in (1, -1):
            for s2 in (1, -1):
                out.append(LatticePoint(s1 * a, s2 * b))
    return tuple(out)


def _symmetry(swap: bool, s1: int, s2: int):
    def apply(p: Tuple[int, int]) -> LatticePoint:
        a, b = (p[1], p[0]) if swap else (p[0], p[1])
        return LatticePoint(s1 * a, s2 * b)

    return apply


SYMMETRIES = tuple(_symmetry(swap, s1, s2) for swap in (False, True) for s1 in (1, -1) for s2 in (1, -1))


def kernel_soundness(alpha: float, radius: int = 1000, cone_radius: int = 30) -> dict:
    """Row sums, outcome ranges and dihedral symmetry of the kernel.

    Every axis site with max-norm <= radius and the origin are checked, and every cone
    site with max-norm <= cone_radius (the cone rule does not depend on the site).
    """
    if radius < 1 or cone_radius < 1:
        raise PreconditionError("radius and cone_radius must be >= 1")
    params = WalkParams(alpha=alpha)
    sites = [ORIGIN] + [arm.site(i) for arm in ARMS for i in range(1, radius + 1)]
    sites += [LatticePoint(a, b) for a in range(-cone_radius, cone_radius + 1)
              for b in range(-cone_radius, cone_radius + 1) if a != 0 and b != 0]
    row_error = 0.0
    symmetry_error = 0.0
    in_range = True
    nearest = True
    for p in sites:
        dist = transition_distribution(p, params)
        row_error = max(row_error, abs(dist.total() - 1.0))
        outcomes = dist.as_dict()
        for q, prob in outcomes.items():
            in_range &= 0.0 <= prob <= 1.0
            nearest &= abs(q.x1 - p.x1) + abs(q.x2 - p.x2) == 1
        for sigma in SYMMETRIES:
            image = transition_distribution(sigma(p), params).as_dict()
            for q, prob in outcomes.items():
                symmetry_error = max(symmetry_error, abs(image.get(sigma(q), 0.0) - prob))
    return {
        "alpha": alpha,
        "sites": len(sites),
        "max_row_error": row_error,
        "max_symmetry_error": symmetry_error,
        "in_range": bool(in_range),
        "nearest_neighbour": bool(nearest),
        "holds": bool(row_error <= ROW_SUM_TOLERANCE and symmetry_error <= ROW_SUM_TOLERANCE and in_range and nearest),
    }
