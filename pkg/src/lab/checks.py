"""Statistical checks of a campaign against the exact-solver constants.

The limits behind every check converge at rate 1/log n, so the checks compare two
independent estimates inside wide bands and look at the direction of travel over
horizons instead of asserting the limit itself.
"""
from __future__ import annotations

import math
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy import stats

from src.errors import PreconditionError
from src.exact.axis import axis_chain
from src.exact.measure import EmpiricalMeasure
from src.lab.campaign import Campaign, EstimateReport, replicate
from src.logs import get_logger
from src.walk.excursions import DEFAULT_BETA, DURATION_BINS
from src.walk.lattice import ARMS, classify

logger = get_logger(__name__)

DEFAULT_BAND = 0.25
CHI_SQUARE_LEVEL = 0.01
MIN_EXPECTED = 5.0
ZERO_EXCEEDANCE_FRACTION = 0.95

# estimator name -> how its target is read off the constants mapping
TARGETS = {
    "excursion_rate": lambda c: c["c1"],
    "axis_local_time": lambda c: c["c"],
    "origin_local_time": lambda c: c["c_prime"],
    "cone_time_ratio": lambda c: 1.0 / c["c1"],
}


def _relative_gap(value: float, target: float) -> float:
    return abs(value / target - 1.0)


def renewal_rate_check(report: EstimateReport, consts: Mapping[str, float], band: float = DEFAULT_BAND) -> Dict[str, Any]:
    """Each (log n / n)-scaled estimator, and the cone-time ratio, against its exact constant."""
    rows = {}
    for name, target_of in TARGETS.items():
        est = report.estimates[name]
        target = float(target_of(consts))
        gap = _relative_gap(est.mean, target)
        rows[name] = {
            "estimate": est.mean,
            "stderr": est.stderr,
            "target": target,
            "relative_gap": gap,
            "passed": bool(gap <= band),
        }
    return {"band": band, "rows": rows, "passed": all(r["passed"] for r in rows.values())}


def cone_time_check(report: EstimateReport, consts: Mapping[str, float], band: float = DEFAULT_BAND) -> Dict[str, Any]:
    """sum(eta_i - rho_{i-1}) / (m log m) per replica, next to the cone-time target (4/pi) E_{pi-dagger}[norm].

    Also reports how the excursion count m compares with c1 n / log n.
    """
    ratio = report.estimates["cone_time_ratio"]
    target = float(consts["cone_time_target"])
    n = report.campaign.n
    expected_m = consts["c1"] * n / math.log(n)
    m = report.estimates["excursion_count"].mean
    return {
        "ratio": ratio.mean,
        "stderr": ratio.stderr,
        "target": target,
        "inverse_c1": 1.0 / consts["c1"],
        "ratio_to_target": ratio.mean / target,
        "excursions": m,
        "expected_excursions": expected_m,
        "excursion_gap": _relative_gap(m, expected_m),
        "passed": bool(_relative_gap(ratio.mean, target) <= band and _relative_gap(m, expected_m) <= band),
    }


def moment_check(
    report: EstimateReport,
    beta: float = DEFAULT_BETA,
    entry_measure: Optional[EmpiricalMeasure] = None,
    min_count: int = 30,
) -> Dict[str, Any]:
    """Block means of max_norm(X_{eta_i})^beta over excursion-index blocks [2^b, 2^(b+1)).

    The block means should show no trend; their running maximum is reported. The count of
    entries above n^0.55 should be zero in nearly every replica.
    """
    merged = report.merged
    blocks, means = [], []
    for b in sorted(merged.entry_norm_blocks):
        block = merged.entry_norm_blocks[b]
        total = sum(block.values())
        if total < min_count:
            continue
        blocks.append(b)
        means.append(math.fsum(c * float(r) ** beta for r, c in block.items()) / total)
    running_max = list(np.maximum.accumulate(means)) if means else []
    trend = None
    if len(blocks) >= 3:
        fit = stats.linregress(blocks, np.log(means))
        trend = {"slope": float(fit.slope), "stderr": float(fit.stderr), "pvalue": float(fit.pvalue)}
    exceed = report.per_replica["entries_above_threshold"]
    zero_fraction = sum(1 for v in exceed if v == 0) / len(exceed)
    mean_norm = merged.entry_norm_moment(1.0)
    measure_mean = entry_measure.norm_moment(1.0) if entry_measure is not None else mean_norm
    flat = trend is None or trend["pvalue"] >= CHI_SQUARE_LEVEL
    return {
        "beta": beta,
        "threshold": merged.threshold,
        "blocks": blocks,
        "block_means": means,
        "running_max": [float(v) for v in running_max],
        "trend": trend,
        "flat": bool(flat),
        "zero_exceedance_fraction": zero_fraction,
        "entries_above_threshold": merged.entries_above_threshold,
        "mean_norm": mean_norm,
        "mean_norm_from_measure": measure_mean,
        "passed": bool(flat and zero_fraction >= ZERO_EXCEEDANCE_FRACTION),
    }


def _start_law(entry: EmpiricalMeasure, n: int):
    """Split a law on the axes into origin mass and a (4, n) array of arm masses."""
    arms = np.zeros((4, n))
    origin = 0.0
    for site, m in entry.support.items():
        kind = classify(site)
        if not kind.on_axis:
            raise PreconditionError(f"entry law charges the cone site {tuple(site)}")
        if kind.arm is None:
            origin += m
        elif kind.i <= n:
            arms[ARMS.index(kind.arm), kind.i - 1] += m
    return origin, arms


def duration_law(entry: EmpiricalMeasure, alpha: float, R: int, bins: int = DURATION_BINS) -> np.ndarray:
    """P(rho - eta = r) for r = 1..bins, then P(rho - eta > bins), from the start law `entry`."""
    chain = axis_chain(float(alpha), int(R))
    origin, arms = _start_law(entry, chain.n)
    surv = chain.survival_from(origin, arms, bins)
    surv = surv / surv[0]
    return np.append(surv[:-1] - surv[1:], surv[-1])


def _merge_small_bins(observed: np.ndarray, expected: np.ndarray, min_expected: float):
    obs, exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed[::-1], expected[::-1]):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs.append(acc_o)
            exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and exp:
        obs[-1] += acc_o
        exp[-1] += acc_e
    return np.array(obs[::-1]), np.array(exp[::-1])


def axis_duration_chisquare(
    report: EstimateReport,
    entry: EmpiricalMeasure,
    R: int,
    level: float = CHI_SQUARE_LEVEL,
) -> Dict[str, Any]:
    """Chi-square test of the axis durations rho_i - eta_i (r <= 20, tail binned) against
    the axis chain started from the empirical entry law."""
    hist = report.merged.axis_duration_histogram
    observed = np.array([hist.get(r, 0) for r in range(1, DURATION_BINS + 2)], dtype=float)
    total = observed.sum()
    if total == 0:
        raise PreconditionError("no completed excursions to test")
    probs = duration_law(entry, report.campaign.params.alpha, R)
    expected = probs * total
    obs, exp = _merge_small_bins(observed, expected, MIN_EXPECTED)
    if len(obs) < 2:
        raise PreconditionError(f"only {int(total)} completed excursions; too few for a chi-square test")
    exp = exp * obs.sum() / exp.sum()
    result = stats.chisquare(obs, exp)
    return {
        "observed": observed.tolist(),
        "expected": expected.tolist(),
        "bins_used": int(len(obs)),
        "statistic": float(result.statistic),
        "pvalue": float(result.pvalue),
        "level": level,
        "passed": bool(result.pvalue >= level),
    }


def per_excursion_check(report: EstimateReport, consts: Mapping[str, float], band: float = 0.15) -> Dict[str, Any]:
    """sum f(B_i) / N_n against E_{pi*}[f(B_0)] for every functional of the campaign."""
    rows = {}
    for fid in report.campaign.functionals:
        key = f"E_pi_star_f:{fid}"
        if key not in consts:
            continue
        est = report.estimates[f"per_excursion:{fid}"]
        target = float(consts[key])
        gap = _relative_gap(est.mean, target)
        rows[fid] = {"estimate": est.mean, "stderr": est.stderr, "target": target, "relative_gap": gap,
                     "passed": bool(gap <= band)}
    return {"band": band, "rows": rows, "passed": all(r["passed"] for r in rows.values())}


def _approaches(gaps: Sequence[float], slack: Sequence[float]) -> bool:
    return all(later <= earlier + s for earlier, later, s in zip(gaps, gaps[1:], slack[1:]))


def trend_check(
    campaign: Campaign,
    consts: Mapping[str, float],
    horizons: Optional[Sequence[int]] = None,
    band: float = DEFAULT_BAND,
    jobs: int = 1,
    final: Optional[EstimateReport] = None,
) -> Dict[str, Any]:
    """Run the campaign at n/100, n/10 and n and check that every estimator's relative gap
    to its constant does not grow (up to two standard errors) and ends inside the band.

    `final`, when given, is reused as the report at the largest horizon.
    """
    if horizons is None:
        horizons = [max(2, campaign.n // 100), max(2, campaign.n // 10), campaign.n]
    reports: List[EstimateReport] = []
    for n in horizons:
        if final is not None and n == final.campaign.n:
            reports.append(final)
        else:
            reports.append(replicate(campaign.with_horizon(n), jobs))
    rows = {}
    for name, target_of in TARGETS.items():
        target = float(target_of(consts))
        means = [r.estimates[name].mean for r in reports]
        gaps = [_relative_gap(m, target) for m in means]
        slack = [2.0 * r.estimates[name].stderr / target for r in reports]
        monotone = _approaches(gaps, [0.0 if math.isnan(s) else s for s in slack])
        rows[name] = {
            "target": target,
            "estimates": means,
            "relative_gaps": gaps,
            "monotone": bool(monotone),
            "final_in_band": bool(gaps[-1] <= band),
            "passed": bool(monotone and gaps[-1] <= band),
        }
        logger.info("trend %s: gaps %s", name, ", ".join(f"{g:.3f}" for g in gaps))
    return {"horizons": list(horizons), "band": band, "rows": rows, "passed": all(r["passed"] for r in rows.values())}
