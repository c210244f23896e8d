from collections import Counter
from typing import Dict, List, Optional

import pytest

from src.lab.campaign import Campaign, Estimate, EstimateReport
from src.walk.excursions import RunStats
from src.walk.lattice import WalkParams


@pytest.fixture
def params4():
    return WalkParams(alpha=4.0)


@pytest.fixture
def output_dir(tmp_path):
    out = tmp_path / "artifacts"
    out.mkdir()
    return out


def fake_report(
    samples: Dict[str, List[float]],
    n: int = 1_000_000,
    merged: Optional[RunStats] = None,
    alpha: float = 4.0,
) -> EstimateReport:
    """EstimateReport built from given per-replica samples, without simulating anything."""
    replicas = len(next(iter(samples.values())))
    campaign = Campaign(params=WalkParams(alpha=alpha), n=n, replicas=max(2, replicas), base_seed=0)
    if merged is None:
        merged = RunStats(n=n, threshold=campaign.threshold, replicas=replicas,
                          axis_duration_histogram=Counter(), entry_norm_blocks={})
    estimates = {name: Estimate.from_samples(values) for name, values in samples.items()}
    return EstimateReport(campaign, estimates, {k: list(v) for k, v in samples.items()}, merged)


@pytest.fixture
def make_report():
    return fake_report
