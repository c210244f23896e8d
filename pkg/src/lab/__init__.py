"""Monte Carlo campaigns and their statistical checks."""
from src.lab.campaign import Campaign, Estimate, EstimateReport, merge_all, replicate, run_replicas
from src.lab.checks import (
    axis_duration_chisquare,
    cone_time_check,
    moment_check,
    per_excursion_check,
    renewal_rate_check,
    trend_check,
)
from src.lab.empirical import EmpiricalInvariants, empirical_invariants

__all__ = [
    "Campaign",
    "EmpiricalInvariants",
    "Estimate",
    "EstimateReport",
    "axis_duration_chisquare",
    "cone_time_check",
    "empirical_invariants",
    "merge_all",
    "moment_check",
    "per_excursion_check",
    "renewal_rate_check",
    "replicate",
    "run_replicas",
    "trend_check",
]
