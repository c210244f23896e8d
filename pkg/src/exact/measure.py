from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from src.errors import PreconditionError
from src.walk.lattice import LatticePoint, dihedral_images, max_norm

PROBABILITY_TOLERANCE = 1e-9


@dataclass
class EmpiricalMeasure:
    """Sparse mass function over sites, with the mass lost to truncation kept apart."""

    support: Dict[LatticePoint, float] = field(default_factory=dict)
    deficit: float = 0.0

    @classmethod
    def from_counts(cls, counts: Mapping[Tuple[int, int], float]) -> "EmpiricalMeasure":
        total = float(sum(counts.values()))
        if total <= 0:
            raise PreconditionError("cannot normalize an empty histogram")
        return cls({LatticePoint(*site): c / total for site, c in counts.items() if c > 0})

    @classmethod
    def from_arrays(cls, sites: Iterable[Tuple[int, int]], masses: Iterable[float], deficit: float = 0.0):
        support: Dict[LatticePoint, float] = {}
        for site, m in zip(sites, masses):
            if m > 0:
                key = LatticePoint(*site)
                support[key] = support.get(key, 0.0) + float(m)
        return cls(support, max(0.0, float(deficit)))

    def mass(self, site: Tuple[int, int]) -> float:
        return self.support.get(LatticePoint(*site), 0.0)

    def total(self) -> float:
        return math.fsum(self.support.values())

    def is_probability(self, tol: float = PROBABILITY_TOLERANCE) -> bool:
        if self.deficit < 0 or any(m < 0 for m in self.support.values()):
            return False
        return abs(self.total() + self.deficit - 1.0) <= tol

    def normalized(self) -> "EmpiricalMeasure":
        total = self.total()
        if total <= 0:
            raise PreconditionError("cannot normalize a measure without mass")
        return EmpiricalMeasure({s: m / total for s, m in self.support.items()})

    def expect(self, fn: Callable[[LatticePoint], float]) -> float:
        return math.fsum(m * fn(s) for s, m in self.support.items())

    def norm_moment(self, beta: float = 1.0) -> float:
        return self.expect(lambda s: float(max_norm(s)) ** beta)

    def shells(self) -> Dict[int, float]:
        """Mass aggregated by max-norm shell."""
        out: Dict[int, float] = {}
        for s, m in self.support.items():
            r = max_norm(s)
            out[r] = out.get(r, 0.0) + m
        return out

    def tail(self, r: int) -> float:
        """Mass strictly beyond max-norm r."""
        return math.fsum(m for s, m in self.support.items() if max_norm(s) > r)

    def total_variation(self, other: "EmpiricalMeasure") -> float:
        keys = set(self.support) | set(other.support)
        return 0.5 * math.fsum(abs(self.mass(k) - other.mass(k)) for k in keys)

    def symmetry_defect(self) -> float:
        """Largest |mu(sigma x) - mu(x)| over the lattice symmetries."""
        worst = 0.0
        for s, m in self.support.items():
            for image in dihedral_images(s):
                worst = max(worst, abs(self.mass(image) - m))
        return worst

    def to_rows(self) -> List[List[float]]:
        return [[int(s.x1), int(s.x2), float(m)] for s, m in sorted(self.support.items())]

    def to_dict(self) -> Dict[str, object]:
        return {"support": self.to_rows(), "deficit": float(self.deficit), "total": self.total()}

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> "EmpiricalMeasure":
        rows = data["support"]
        return cls.from_arrays(((r[0], r[1]) for r in rows), (r[2] for r in rows), float(data.get("deficit", 0.0)))

    def as_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        rows = sorted(self.support.items())
        sites = np.array([[s.x1, s.x2] for s, _ in rows], dtype=np.int64).reshape(-1, 2)
        masses = np.array([m for _, m in rows], dtype=float)
        return sites, masses


SHELL_SITES = {
    "plane": lambda r: 8.0 * r,
    "axes": lambda r: 4.0,
    "boundary": lambda r: 4.0 if r == 1 else 8.0,
}


def shell_slope(shells: Mapping[int, float], lo: int, hi: int, counts: Optional[Mapping[int, int]] = None,
                min_count: int = 0, support: str = "plane"):
    """Per-site log-log slope of a shell profile over lo <= r <= hi.

    The per-site mass of shell r is its mass over the number of sites the support has
    at max-norm r: 8r in the plane, 4 on the axes, 8 on the cone boundary (4 corners at
    r = 1). Shells with fewer than `min_count` observations (when counts are given) are
    dropped. Returns the scipy linregress result, or None with fewer than three usable shells.
    """
    from scipy import stats

    if support not in SHELL_SITES:
        raise PreconditionError(f"unknown support {support!r}")
    size = SHELL_SITES[support]
    rs, ys = [], []
    for r in range(lo, hi + 1):
        m = shells.get(r, 0.0)
        if m <= 0:
            continue
        if counts is not None and counts.get(r, 0) < min_count:
            continue
        rs.append(math.log(r))
        ys.append(math.log(m / size(r)))
    if len(rs) < 3:
        return None
    return stats.linregress(rs, ys)
