import math
from collections import Counter

import numpy as np
import pytest

from src.errors import PreconditionError
from src.exact.measure import EmpiricalMeasure
from src.lab import checks
from src.lab.checks import (
    _merge_small_bins,
    axis_duration_chisquare,
    cone_time_check,
    duration_law,
    moment_check,
    per_excursion_check,
    renewal_rate_check,
    trend_check,
)
from src.walk.excursions import DURATION_BINS, RunStats

CONSTS = {
    "c1": 0.1,
    "c": 0.5,
    "c_prime": 0.2,
    "cone_time_target": 10.0,
    "E_pi_star_f:axis_local_time": 5.0,
    "E_pi_star_f:origin_local_time": 2.0,
}


def _on_target(scale=1.0, replicas=3):
    return {
        "excursion_rate": [0.1 * scale] * replicas,
        "axis_local_time": [0.5 * scale] * replicas,
        "origin_local_time": [0.2 * scale] * replicas,
        "cone_time_ratio": [10.0 * scale] * replicas,
    }


def test_renewal_rates_inside_the_band(make_report):
    result = renewal_rate_check(make_report(_on_target(1.1)), CONSTS)
    assert result["passed"]
    assert result["rows"]["excursion_rate"]["relative_gap"] == pytest.approx(0.1)


def test_renewal_rates_outside_the_band(make_report):
    samples = _on_target()
    samples["origin_local_time"] = [0.4, 0.4, 0.4]
    result = renewal_rate_check(make_report(samples), CONSTS)
    assert not result["passed"]
    assert result["rows"]["origin_local_time"]["relative_gap"] == pytest.approx(1.0)
    assert result["rows"]["axis_local_time"]["passed"]


def test_cone_time_and_excursion_count(make_report):
    n = 1_000_000
    expected_m = 0.1 * n / math.log(n)
    samples = {"cone_time_ratio": [9.0, 10.0, 11.0], "excursion_count": [expected_m] * 3}
    result = cone_time_check(make_report(samples, n=n), CONSTS)
    assert result["passed"]
    assert result["ratio_to_target"] == pytest.approx(1.0)
    assert result["expected_excursions"] == pytest.approx(expected_m)
    samples["excursion_count"] = [2 * expected_m] * 3
    assert not cone_time_check(make_report(samples, n=n), CONSTS)["passed"]


def test_per_excursion_averages(make_report):
    samples = {"per_excursion:axis_local_time": [5.1, 4.9], "per_excursion:origin_local_time": [2.0, 2.1]}
    result = per_excursion_check(make_report(samples), CONSTS)
    assert result["passed"]
    assert set(result["rows"]) == {"axis_local_time", "origin_local_time"}


def _stats_with_blocks(blocks):
    return RunStats(n=1_000_000, threshold=1_000_000 ** 0.55, entry_norm_blocks=blocks)


def test_moment_blocks_without_trend(make_report):
    blocks = {b: Counter({1: 50, 2: 50}) if b % 2 == 0 else Counter({1: 52, 2: 48}) for b in range(8)}
    report = make_report({"entries_above_threshold": [0, 0, 0]}, merged=_stats_with_blocks(blocks))
    result = moment_check(report)
    assert result["flat"]
    assert result["passed"]
    assert result["blocks"] == list(range(8))
    assert result["running_max"][-1] == max(result["block_means"])
    assert result["zero_exceedance_fraction"] == 1.0


def test_moment_blocks_with_growth(make_report):
    blocks = {b: Counter({2 ** b: 100}) for b in range(8)}
    report = make_report({"entries_above_threshold": [0, 1, 0]}, merged=_stats_with_blocks(blocks))
    result = moment_check(report)
    assert not result["flat"]
    assert not result["passed"]
    assert result["trend"]["slope"] == pytest.approx(1.5 * math.log(2))


def test_small_blocks_are_skipped(make_report):
    blocks = {0: Counter({1: 5}), 1: Counter({1: 100})}
    report = make_report({"entries_above_threshold": [0, 0]}, merged=_stats_with_blocks(blocks))
    result = moment_check(report)
    assert result["blocks"] == [1]
    assert result["trend"] is None


def test_duration_law_from_a_point_mass():
    law = duration_law(EmpiricalMeasure.from_counts({(0, 1): 1}), 4.0, 50)
    assert len(law) == DURATION_BINS + 1
    # from a first arm site two of the four moves enter the cone
    assert law[0] == pytest.approx(0.5)
    assert law.sum() == pytest.approx(1.0)
    assert duration_law(EmpiricalMeasure.from_counts({(0, 0): 1}), 4.0, 50)[0] == 0.0


def test_duration_law_refuses_cone_sites():
    with pytest.raises(PreconditionError):
        duration_law(EmpiricalMeasure.from_counts({(1, 1): 1}), 4.0, 50)


def test_small_bins_merge_into_their_neighbour():
    obs, exp = _merge_small_bins(np.array([10.0, 20, 1, 1]), np.array([10.0, 20, 1, 1]), 5.0)
    assert obs.tolist() == [10.0, 22.0]
    assert exp.tolist() == [10.0, 22.0]


def test_chisquare_accepts_the_exact_law(make_report):
    entry = EmpiricalMeasure.from_counts({(0, 1): 3, (0, 0): 1, (5, 0): 1})
    probs = duration_law(entry, 4.0, 50)
    hist = Counter({r + 1: int(round(p * 100_000)) for r, p in enumerate(probs)})
    stats = RunStats(n=1_000_000, threshold=1_000_000 ** 0.55, axis_duration_histogram=hist)
    result = axis_duration_chisquare(make_report({"excursion_rate": [0.1, 0.1]}, merged=stats), entry, 50)
    assert result["passed"]
    assert result["pvalue"] > 0.5


def test_chisquare_needs_data(make_report):
    entry = EmpiricalMeasure.from_counts({(0, 1): 1})
    with pytest.raises(PreconditionError):
        axis_duration_chisquare(make_report({"excursion_rate": [0.1, 0.1]}), entry, 50)


def test_trend_towards_the_constants(make_report, monkeypatch):
    gaps = {10_000: 1.2, 100_000: 1.1, 1_000_000: 1.05}
    monkeypatch.setattr(checks, "replicate", lambda campaign, jobs=1: make_report(_on_target(gaps[campaign.n]), n=campaign.n))
    final = make_report(_on_target(gaps[1_000_000]))
    result = trend_check(final.campaign, CONSTS, final=final)
    assert result["horizons"] == [10_000, 100_000, 1_000_000]
    assert result["passed"]
    assert result["rows"]["excursion_rate"]["relative_gaps"] == pytest.approx([0.2, 0.1, 0.05])


def test_trend_away_from_the_constants(make_report, monkeypatch):
    gaps = {10_000: 1.05, 100_000: 1.1, 1_000_000: 1.2}
    monkeypatch.setattr(checks, "replicate", lambda campaign, jobs=1: make_report(_on_target(gaps[campaign.n]), n=campaign.n))
    result = trend_check(make_report(_on_target()).campaign, CONSTS)
    assert not result["passed"]
    assert not result["rows"]["cone_time_ratio"]["monotone"]
