"""Empirical embedded laws from the entry/exit histograms of a campaign."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from src.errors import PreconditionError
from src.exact.measure import EmpiricalMeasure, shell_slope
from src.lab.campaign import EstimateReport
from src.logs import get_logger
from src.walk.lattice import max_norm

logger = get_logger(__name__)

MIN_EXCURSIONS = 10_000
ENTRY_BAND = (5, 40)
EXIT_BAND = (2, 15)


@dataclass
class ShellFit:
    slope: float
    stderr: float
    intercept: float
    shells_used: int
    band: Tuple[int, int]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "slope": self.slope,
            "stderr": self.stderr,
            "intercept": self.intercept,
            "shells_used": self.shells_used,
            "band": list(self.band),
        }


@dataclass
class EmpiricalInvariants:
    entry: EmpiricalMeasure
    exit: EmpiricalMeasure
    entry_count: int
    exit_count: int
    slopes: Dict[str, Optional[ShellFit]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "entry": self.entry.to_dict(),
            "exit": self.exit.to_dict(),
            "entry_count": self.entry_count,
            "exit_count": self.exit_count,
            "slopes": {k: (v.to_dict() if v is not None else None) for k, v in sorted(self.slopes.items())},
        }


def _shell_counts(histogram: Counter) -> Dict[int, int]:
    out: Dict[int, int] = {}
    for site, c in histogram.items():
        r = max_norm(site)
        out[r] = out.get(r, 0) + int(c)
    return out


def _fit(measure: EmpiricalMeasure, histogram: Counter, band: Tuple[int, int], min_count: int,
         support: str) -> Optional[ShellFit]:
    counts = _shell_counts(histogram)
    used = sum(1 for r in range(band[0], band[1] + 1) if counts.get(r, 0) >= min_count)
    fit = shell_slope(measure.shells(), band[0], band[1], counts=counts, min_count=min_count, support=support)
    if fit is None:
        return None
    return ShellFit(float(fit.slope), float(fit.stderr), float(fit.intercept), used, band)


def empirical_invariants(
    report: EstimateReport,
    entry_band: Tuple[int, int] = ENTRY_BAND,
    exit_band: Tuple[int, int] = EXIT_BAND,
    min_count: int = 30,
    min_excursions: int = MIN_EXCURSIONS,
) -> EmpiricalInvariants:
    """Normalised histograms of X_{eta_i} and X_{rho_i} with their per-site shell slopes.

    Shells with fewer than `min_count` observations are dropped from the fits; a fit
    with fewer than three shells left comes back as None.
    """
    merged = report.merged
    if merged.N_n < min_excursions:
        raise PreconditionError(
            f"empirical invariant laws need at least {min_excursions} excursions, got {merged.N_n}; "
            "raise n or the replica count"
        )
    entry = EmpiricalMeasure.from_counts(merged.entry_histogram).normalized()
    exit_law = EmpiricalMeasure.from_counts(merged.exit_histogram).normalized()
    slopes = {
        "entry": _fit(entry, merged.entry_histogram, entry_band, min_count, "axes"),
        "exit": _fit(exit_law, merged.exit_histogram, exit_band, min_count, "boundary"),
    }
    for name, fit in slopes.items():
        if fit is None:
            logger.warning("%s shell fit skipped: fewer than 3 shells with %d counts", name, min_count)
    return EmpiricalInvariants(
        entry=entry,
        exit=exit_law,
        entry_count=sum(merged.entry_histogram.values()),
        exit_count=sum(merged.exit_histogram.values()),
        slopes=slopes,
    )
