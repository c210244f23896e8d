"""Replicated simulation campaigns.

Replica r of a campaign runs on stream r of the campaign's seed, so a campaign is
reproducible from (seed, replicas, n, alpha) alone. Replicas run in worker processes
and come back in replica order, which keeps every merged number independent of the
number of workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import t

from src.errors import PreconditionError
from src.logs import get_logger
from src.walk.excursions import DEFAULT_THRESHOLD_EXPONENT, RunStats, run_walk, theorem_estimates
from src.walk.functionals import BUILTIN_IDS, get_functionals
from src.walk.lattice import WalkParams

logger = get_logger(__name__)

CONFIDENCE = 0.95


class Campaign(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: WalkParams
    n: int = Field(..., ge=2)
    replicas: int = Field(..., ge=1)
    base_seed: int = Field(..., ge=0, lt=2**64)
    functionals: Tuple[str, ...] = BUILTIN_IDS
    threshold_exponent: float = DEFAULT_THRESHOLD_EXPONENT

    @property
    def threshold(self) -> float:
        return float(self.n) ** self.threshold_exponent

    def with_horizon(self, n: int) -> "Campaign":
        return self.model_copy(update={"n": int(n)})


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    half_width: float
    replicas: int

    @classmethod
    def from_samples(cls, samples: List[float]) -> "Estimate":
        data = np.asarray(samples, dtype=float)
        r = data.size
        mean = float(np.mean(data)) if r else math.nan
        if r < 2:
            return cls(mean, math.nan, math.nan, r)
        s = float(np.std(data, ddof=1))
        stderr = s / math.sqrt(r)
        tcrit = float(t.ppf(1.0 - (1.0 - CONFIDENCE) / 2.0, df=r - 1))
        return cls(mean, stderr, tcrit * stderr, r)

    def to_dict(self) -> Dict[str, float]:
        return {"mean": self.mean, "stderr": self.stderr, "half_width": self.half_width, "replicas": self.replicas}


def replica_estimates(stats: RunStats) -> Dict[str, float]:
    """Everything one replica contributes: the scaled estimators plus the per-run checks."""
    out = theorem_estimates(stats)
    m = stats.N_n
    out["cone_time_ratio"] = stats.sum_eta_minus_rho_prev / (m * math.log(m)) if m > 1 else 0.0
    out["excursion_count"] = float(m)
    out["entries_above_threshold"] = float(stats.entries_above_threshold)
    out["entry_norm_mean"] = stats.entry_norm_moment(1.0)
    out["entry_norm_moment_1_5"] = stats.entry_norm_moment(1.5)
    return out


@dataclass
class EstimateReport:
    campaign: Campaign
    estimates: Dict[str, Estimate]
    per_replica: Dict[str, List[float]]
    merged: RunStats
    extras: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "campaign": self.campaign.model_dump(mode="json"),
            "estimates": {k: self.estimates[k].to_dict() for k in sorted(self.estimates)},
            "per_replica": {k: self.per_replica[k] for k in sorted(self.per_replica)},
            "merged": self.merged.to_dict(),
            **({"extras": self.extras} if self.extras else {}),
        }

    def estimate_rows(self) -> List[Dict[str, Any]]:
        return [{"estimator": k, **self.estimates[k].to_dict()} for k in sorted(self.estimates)]


def _run_replica(job: Tuple[float, int, int, int, Tuple[str, ...], float]) -> RunStats:
    alpha, n, seed, stream, functionals, threshold = job
    return run_walk(WalkParams(alpha=alpha), n, seed, get_functionals(functionals), stream=stream, threshold=threshold)


def run_replicas(campaign: Campaign, jobs: int = 1) -> List[RunStats]:
    work = [
        (campaign.params.alpha, campaign.n, campaign.base_seed, r, tuple(campaign.functionals), campaign.threshold)
        for r in range(campaign.replicas)
    ]
    if jobs <= 1 or len(work) == 1:
        return [_run_replica(job) for job in work]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_run_replica, work))


def merge_all(runs: List[RunStats]) -> RunStats:
    merged = runs[0]
    for other in runs[1:]:
        merged = merged.merge(other)
    return merged


def replicate(campaign: Campaign, jobs: int = 1) -> EstimateReport:
    """Run the replicas, merge their aggregates and summarise each estimator across replicas."""
    if campaign.replicas < 2:
        raise PreconditionError(f"replicate needs at least 2 replicas, got {campaign.replicas}")
    logger.info(
        "campaign alpha=%s n=%d replicas=%d seed=%d jobs=%d",
        campaign.params.alpha, campaign.n, campaign.replicas, campaign.base_seed, jobs,
    )
    runs = run_replicas(campaign, jobs)
    per_replica: Dict[str, List[float]] = {}
    for stats in runs:
        for name, value in replica_estimates(stats).items():
            per_replica.setdefault(name, []).append(value)
    estimates = {name: Estimate.from_samples(values) for name, values in per_replica.items()}
    return EstimateReport(campaign, estimates, per_replica, merge_all(runs))

