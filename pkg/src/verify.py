"""The verification suite.

Exact identities are checked as residuals, asymptotic statements as bands at a finite
scale (with the trend over scales where the limit is slow), and the Monte Carlo side
against the exact-solver constants. Every check reports its measured value and target;
`run_verification` runs the requested checks in a fixed order.
"""
from __future__ import annotations

import itertools
import time
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from src.asymptotics.ballot import be3_check, binomial_point, reflection_stay_positive, window_mass
from src.asymptotics.semianalytic import cone_exit_semianalytic, eta_tail_semianalytic
from src.config import Config
from src.errors import PreconditionError, WalkLabError
from src.exact.cone import cone_exit
from src.exact.constants import EXIT_TIME_LIMIT, LOCAL_LIMIT, constants
from src.exact.identities import (
    axis_time_moments,
    exit_bracket_profile,
    exit_comparison,
    exit_norm_tail,
    infcone_check,
    reverse_sum_extrapolated,
    reversibility_residual,
    survival_slope,
)
from src.exact.invariant import solve_invariants
from src.exact.measure import shell_slope
from src.lab.campaign import Campaign, EstimateReport, replicate
from src.lab.checks import (
    axis_duration_chisquare,
    cone_time_check,
    moment_check,
    per_excursion_check,
    renewal_rate_check,
    trend_check,
)
from src.lab.empirical import EmpiricalInvariants, empirical_invariants
from src.logs import get_logger
from src.tools.artifacts import dumps
from src.walk.lattice import ARMS, WalkParams, kernel_soundness

logger = get_logger(__name__)

KERNEL_ALPHAS = (1.5, 2.0, 3.5, 4.0)
REVERSIBILITY_PAIRS = 100
REVERSIBILITY_MAX_DISTANCE = 50
REVERSE_SUM_SITES = ((0, 1), (0, 3), (0, 10))
BRACKET_I_MAX = 50
LOCAL_LIMIT_XS = (40, 80, 160)
# horizons past factor * x^2 hold about 1/(2 factor^2) of the exit mass
LOCAL_LIMIT_HORIZON_FACTOR = 100
TIME_TAIL_K = 2000
DP_CROSS_XS = (5, 10, 20, 30)
DP_CROSS_R = 120
DP_CROSS_T = 2000
DP_TIME_KS = (20, 50, 100, 200)
BALLOT_MAX_SITE = 4
BALLOT_MAX_STEPS = 14
BINOMIAL_REFERENCE = 0.0795892
EXIT_NORM_TAIL_BOUND = 20.0
ENTRY_TAIL_SLOPE = -3.0
ENTRY_SLOPE_BAND = 0.3
EXIT_SLOPE_BAND = 0.5
STATIONARITY_RESIDUAL = 1e-9
DETERMINISM_HORIZON = 20_000
DETERMINISM_REPLICAS = 3
# keeps the reversibility pairs off the replica streams
PAIR_STREAM = 1 << 32


@dataclass
class CheckResult:
    id: str
    title: str
    value: Any
    target: Any
    passed: bool
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "title": self.title,
            "value": self.value,
            "target": self.target,
            "passed": bool(self.passed),
            "detail": self.detail,
        }


@dataclass
class VerifyReport:
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> List[str]:
        return [c.id for c in self.checks if not c.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {"checks": [c.to_dict() for c in self.checks], "passed": self.passed, "failed": self.failed}


class VerifyContext:
    """Lazily computed inputs shared by the checks."""

    def __init__(self, config: Config):
        self.config = config

    @property
    def alpha(self) -> float:
        return self.config.alpha

    @property
    def R(self) -> int:
        return self.config.R

    @property
    def seed(self) -> int:
        return self.config.require_seed("verify")

    @cached_property
    def constants(self) -> Dict[str, float]:
        tol = self.config.tolerances
        return constants(self.alpha, self.R, self.config.functionals, tol.power_tol, tol.power_max_iter,
                         self.config.allow_subcritical)

    @cached_property
    def campaign(self) -> Campaign:
        return Campaign(
            params=WalkParams(alpha=self.alpha),
            n=self.config.n,
            replicas=self.config.replicas,
            base_seed=self.seed,
            functionals=tuple(self.config.functionals),
        )

    @cached_property
    def report(self) -> EstimateReport:
        return replicate(self.campaign, self.config.jobs)

    @cached_property
    def empirical(self) -> EmpiricalInvariants:
        return empirical_invariants(self.report, min_count=self.config.tolerances.min_shell_count)


def _kernel(ctx: VerifyContext) -> CheckResult:
    rows = [kernel_soundness(a) for a in KERNEL_ALPHAS]
    worst = max(max(r["max_row_error"], r["max_symmetry_error"]) for r in rows)
    return CheckResult("kernel", "kernel rows sum to 1 and commute with the lattice symmetries",
                       worst, 1e-12, all(r["holds"] for r in rows), {"rows": rows})


def _random_pairs(seed: int, count: int, max_distance: int) -> List[Tuple[Tuple[int, int], Tuple[int, int]]]:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(PAIR_STREAM,)))
    pairs = []
    for j in range(count):
        i, k = (int(v) for v in rng.choice(np.arange(2, max_distance + 1), size=2, replace=False))
        if j % 2 == 0:
            arm = ARMS[int(rng.integers(4))]
            pairs.append((tuple(arm.site(i)), tuple(arm.site(k))))
        else:
            a, b = (ARMS[int(v)] for v in rng.choice(4, size=2, replace=False))
            pairs.append((tuple(a.site(i)), tuple(b.site(k))))
    return pairs


def _reversibility(ctx: VerifyContext) -> CheckResult:
    max_distance = min(REVERSIBILITY_MAX_DISTANCE, ctx.R - 1)
    pairs = _random_pairs(ctx.seed, REVERSIBILITY_PAIRS, max_distance)
    residuals = [reversibility_residual(x, y, ctx.alpha, ctx.R) for x, y in pairs]
    worst = max(residuals)
    tol = ctx.config.tolerances.residual
    return CheckResult("reversibility", "axis exit laws satisfy the reversibility identity",
                       worst, tol, worst <= tol, {"pairs": len(pairs), "max_distance": max_distance})


def _reverse_sum(ctx: VerifyContext) -> CheckResult:
    rows = []
    for x in REVERSE_SUM_SITES:
        r = reverse_sum_extrapolated(x, ctx.R, ctx.config.T)
        r["x"] = list(x)
        r["passed"] = bool(1.9 <= r["value"] <= 2.0 and abs(r["extrapolated"] / 2.0 - 1.0) <= 0.02)
        rows.append(r)
    return CheckResult("reverse-sum", "boundary sum of exit probabilities into an axis site equals 2",
                       [r["value"] for r in rows], 2.0, all(r["passed"] for r in rows), {"rows": rows})


def _exit_bracket(ctx: VerifyContext) -> CheckResult:
    i_max = min(BRACKET_I_MAX, ctx.R - 1)
    profile = exit_bracket_profile(ctx.alpha, ctx.R, i_max)
    values = [r["value"] for r in profile["rows"]]
    return CheckResult("exit-bracket", "4 i^alpha P_(0,i)(X_rho=(1,i)) lies in (1, 1 + 10 i^-alpha) and decreases",
                       values[-1], 1.0, profile["bracket_holds"] and profile["decreasing"], profile)


def _local_limit(ctx: VerifyContext) -> CheckResult:
    rows = []
    for x in LOCAL_LIMIT_XS:
        r = cone_exit_semianalytic(x, 1, K_max=LOCAL_LIMIT_HORIZON_FACTOR * x * x)
        scaled = x ** 3 * r.value
        rows.append({"x": x, "scaled": scaled, "deviation": abs(scaled / LOCAL_LIMIT - 1.0), **r.to_dict()})
    deviations = [r["deviation"] for r in rows]
    decreasing = all(b < a for a, b in zip(deviations, deviations[1:]))
    cross = []
    for x in DP_CROSS_XS:
        dp = cone_exit((1, x), DP_CROSS_R, DP_CROSS_T)
        semi = cone_exit_semianalytic(x, 1, K_max=DP_CROSS_T)
        gap = abs(dp.site_law.mass((1, 0)) - semi.value)
        allowed = 1e-6 + semi.budget + dp.escaped
        cross.append({"x": x, "dp": dp.site_law.mass((1, 0)), "semianalytic": semi.value, "gap": gap,
                      "allowed": allowed, "passed": bool(gap <= allowed)})
    passed = deviations[-1] <= 0.10 and decreasing and all(c["passed"] for c in cross)
    return CheckResult("cone-exit-local-limit", "x^3 P_(1,x)(X_eta=(1,0)) approaches 4/pi",
                       rows[-1]["scaled"], LOCAL_LIMIT, passed,
                       {"rows": rows, "decreasing": decreasing, "horizon_factor": LOCAL_LIMIT_HORIZON_FACTOR,
                        "dp_cross_check": cross})


def _time_tail(ctx: VerifyContext) -> CheckResult:
    r = eta_tail_semianalytic((1, 1), TIME_TAIL_K)
    scaled = TIME_TAIL_K ** 2 * r.value
    deviation = abs(scaled / EXIT_TIME_LIMIT - 1.0)
    dp = cone_exit((1, 1), DP_CROSS_R, max(DP_TIME_KS))
    cross = []
    for k in DP_TIME_KS:
        semi = eta_tail_semianalytic((1, 1), k)
        gap = abs(float(dp.time_law[k]) - semi.value)
        allowed = 1e-8 + semi.budget + dp.escaped
        cross.append({"k": k, "dp": float(dp.time_law[k]), "semianalytic": semi.value, "gap": gap,
                      "allowed": allowed, "passed": bool(gap <= allowed)})
    passed = deviation <= 0.10 and all(c["passed"] for c in cross)
    return CheckResult("exit-time-tail", "k^2 P_(1,1)(eta=k) approaches 4/pi", scaled, EXIT_TIME_LIMIT, passed,
                       {"k": TIME_TAIL_K, "deviation": deviation, **r.to_dict(), "dp_cross_check": cross})


def _enumerate_positive(x: int, k: int) -> Counter:
    """Endpoints of the 2^k paths from x that stay positive, by brute force."""
    out: Counter = Counter()
    for steps in itertools.product((1, -1), repeat=k):
        z = x
        for s in steps:
            z += s
            if z <= 0:
                break
        else:
            out[z] += 1
    return out


def _combinatorics(ctx: VerifyContext) -> CheckResult:
    worst = 0.0
    for x in range(1, BALLOT_MAX_SITE + 1):
        for k in range(1, BALLOT_MAX_STEPS + 1):
            ends = _enumerate_positive(x, k)
            for y in range(1, BALLOT_MAX_SITE + 1):
                brute = ends.get(y, 0) / 2.0 ** k
                closed = reflection_stay_positive(x, y, k)
                worst = max(worst, abs(closed - brute) / max(brute, 1e-300) if brute else abs(closed))
    point = binomial_point(100, 0)
    exact_gap = abs(point.exact / BINOMIAL_REFERENCE - 1.0)
    gaussian_gap = abs(point.gaussian / point.exact - 1.0)
    be3 = be3_check()
    passed = worst <= 1e-12 and exact_gap <= 1e-6 and gaussian_gap <= 0.003 and be3["holds"]
    return CheckResult("ballot-combinatorics", "ballot probabilities, binomial points and the window bound",
                       worst, 1e-12, passed,
                       {"binomial_point": point._asdict(), "exact_gap": exact_gap, "gaussian_gap": gaussian_gap,
                        "be3": be3})


def _fit_dict(fit) -> Optional[Dict[str, float]]:
    if fit is None:
        return None
    return {"slope": float(fit.slope), "stderr": float(fit.stderr)}


def _invariant_tails(ctx: VerifyContext) -> CheckResult:
    tol = ctx.config.tolerances
    pair = solve_invariants(ctx.alpha, ctx.R, None, tol.power_tol, tol.power_max_iter)
    entry = _fit_dict(shell_slope(pair.entry_measure().shells(), 5, 40, support="axes"))
    exit_fit = _fit_dict(shell_slope(pair.exit_measure().shells(), 2, 15, support="boundary"))
    exit_target = -(ctx.alpha + 2.0)
    residual = max(pair.entry_residual, pair.exit_residual)
    passed = (
        entry is not None and abs(entry["slope"] - ENTRY_TAIL_SLOPE) <= ENTRY_SLOPE_BAND
        and exit_fit is not None and abs(exit_fit["slope"] - exit_target) <= EXIT_SLOPE_BAND
        and residual <= STATIONARITY_RESIDUAL
    )
    return CheckResult("invariant-tails", "tails of the embedded invariant laws",
                       {"entry": entry and entry["slope"], "exit": exit_fit and exit_fit["slope"]},
                       {"entry": ENTRY_TAIL_SLOPE, "exit": exit_target}, passed,
                       {"entry_fit": entry, "exit_fit": exit_fit, "residual": residual, "leak": pair.leak,
                        "iterations": pair.iterations})


def _renewal_rates(ctx: VerifyContext) -> CheckResult:
    band = ctx.config.tolerances.band
    rates = renewal_rate_check(ctx.report, ctx.constants, band)
    trend = trend_check(ctx.campaign, ctx.constants, band=band, jobs=ctx.config.jobs, final=ctx.report)
    return CheckResult("renewal-rates", "scaled local times and excursion counts against the exact constants",
                       {k: r["estimate"] for k, r in rates["rows"].items()},
                       {k: r["target"] for k, r in rates["rows"].items()},
                       rates["passed"] and trend["passed"], {"rates": rates, "trend": trend})


def _cone_time(ctx: VerifyContext) -> CheckResult:
    r = cone_time_check(ctx.report, ctx.constants, ctx.config.tolerances.band)
    return CheckResult("cone-time", "cone time per excursion against (4/pi) E[norm] under the exit law",
                       r["ratio"], r["target"], r["passed"], r)


def _per_excursion(ctx: VerifyContext) -> CheckResult:
    r = per_excursion_check(ctx.report, ctx.constants, ctx.config.tolerances.per_excursion_band)
    return CheckResult("per-excursion", "per-excursion functional averages against their exact expectations",
                       {k: v["estimate"] for k, v in r["rows"].items()},
                       {k: v["target"] for k, v in r["rows"].items()}, r["passed"], r)


def _entry_moments(ctx: VerifyContext) -> CheckResult:
    try:
        entry = ctx.empirical.entry
    except PreconditionError:
        entry = None
    r = moment_check(ctx.report, entry_measure=entry, min_count=ctx.config.tolerances.min_shell_count)
    return CheckResult("entry-norm-moments", "entry norms stay bounded in moment and below n^0.55",
                       r["zero_exceedance_fraction"], 0.95, r["passed"], r)


def _axis_durations(ctx: VerifyContext) -> CheckResult:
    r = axis_duration_chisquare(ctx.report, ctx.empirical.entry, ctx.R)
    return CheckResult("axis-durations", "axis durations follow the axis chain started from the entry law",
                       r["pvalue"], r["level"], r["passed"], r)


def _empirical_tails(ctx: VerifyContext) -> CheckResult:
    emp = ctx.empirical
    entry, exit_fit = emp.slopes.get("entry"), emp.slopes.get("exit")
    exit_target = -(ctx.alpha + 2.0)
    passed = (
        entry is not None and abs(entry.slope - ENTRY_TAIL_SLOPE) <= ENTRY_SLOPE_BAND
        and exit_fit is not None and abs(exit_fit.slope - exit_target) <= EXIT_SLOPE_BAND
    )
    return CheckResult("empirical-tails", "tails of the empirical entry and exit laws",
                       {"entry": entry and entry.slope, "exit": exit_fit and exit_fit.slope},
                       {"entry": ENTRY_TAIL_SLOPE, "exit": exit_target}, passed,
                       {k: (v.to_dict() if v else None) for k, v in emp.slopes.items()}
                       | {"entry_count": emp.entry_count, "exit_count": emp.exit_count})


def _axis_time(ctx: VerifyContext) -> CheckResult:
    moments = axis_time_moments(ctx.alpha, ctx.R, 100)
    slope = survival_slope(ctx.alpha, ctx.R, (0, 3), 100, 1000)
    passed = (0.95 <= moments["rho_ratio"] <= 1.05 and 0.9 <= moments["rho_sq_ratio"] <= 1.1
              and slope["slope"] < -5.0)
    return CheckResult("axis-time-moments", "moments of the axis time from (0,100) and its survival slope",
                       {"rho_ratio": moments["rho_ratio"], "rho_sq_ratio": moments["rho_sq_ratio"],
                        "survival_slope": slope["slope"]},
                       {"rho_ratio": 1.0, "rho_sq_ratio": 1.0, "survival_slope": -5.0}, passed,
                       {"moments": moments, "survival": slope})


def _cone_entry(ctx: VerifyContext) -> CheckResult:
    r = infcone_check(ctx.alpha, ctx.R, min(50, ctx.R - 1))
    return CheckResult("cone-entry-bound", "P_x(X_rho=(1,1)) stays above the product bound",
                       r["minimum"], r["bound"], r["holds"], r)


def _exit_comparison(ctx: VerifyContext) -> CheckResult:
    r = exit_comparison(ctx.alpha, ctx.R, 5, min(50, ctx.R - 1))
    return CheckResult("exit-comparison", "path probabilities are dominated by scaled exit probabilities",
                       r["sup_return_probability"], 1.0, r["lower_holds"] and r["return_below_one"], r)


def _exit_norm_tail(ctx: VerifyContext) -> CheckResult:
    rows = []
    for a in (1, 3, 10):
        r = exit_norm_tail((a, 1), ctx.R, ctx.config.T)
        rows.append({"y": r["y"], "max_ratio": r["max_ratio"], "deficit": r["deficit"]})
    worst = max(r["max_ratio"] for r in rows)
    return CheckResult("exit-norm-tail", "r^2 P_y(exit norm > r) / |y| stays bounded",
                       worst, EXIT_NORM_TAIL_BOUND, worst <= EXIT_NORM_TAIL_BOUND, {"rows": rows})


def _window_mass(ctx: VerifyContext) -> CheckResult:
    rows = [window_mass(k, 0.3) for k in (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5)]
    worst = max(r["scaled_gap"] for r in rows)
    return CheckResult("window-mass", "binomial mass outside the window is O(1/sqrt(k))",
                       worst, 1.0, worst <= 1.0, {"rows": rows})


def _determinism(ctx: VerifyContext) -> CheckResult:
    campaign = Campaign(
        params=WalkParams(alpha=ctx.alpha),
        n=min(ctx.config.n, DETERMINISM_HORIZON),
        replicas=DETERMINISM_REPLICAS,
        base_seed=ctx.seed,
        functionals=tuple(ctx.config.functionals),
    )
    texts = [dumps(replicate(campaign, jobs).to_dict()) for jobs in (1, 1, 2)]
    same = len(set(texts)) == 1
    return CheckResult("determinism", "identical campaigns give identical reports for any worker count",
                       same, True, same, {"n": campaign.n, "replicas": campaign.replicas, "jobs": [1, 1, 2]})


CHECKS: List[Tuple[str, Callable[[VerifyContext], CheckResult]]] = [
    ("kernel", _kernel),
    ("reversibility", _reversibility),
    ("reverse-sum", _reverse_sum),
    ("exit-bracket", _exit_bracket),
    ("cone-exit-local-limit", _local_limit),
    ("exit-time-tail", _time_tail),
    ("ballot-combinatorics", _combinatorics),
    ("invariant-tails", _invariant_tails),
    ("renewal-rates", _renewal_rates),
    ("axis-time-moments", _axis_time),
    ("determinism", _determinism),
    ("cone-entry-bound", _cone_entry),
    ("exit-comparison", _exit_comparison),
    ("exit-norm-tail", _exit_norm_tail),
    ("window-mass", _window_mass),
    ("cone-time", _cone_time),
    ("per-excursion", _per_excursion),
    ("entry-norm-moments", _entry_moments),
    ("axis-durations", _axis_durations),
    ("empirical-tails", _empirical_tails),
]

CHECK_IDS = tuple(name for name, _ in CHECKS)


def run_verification(config: Config, only: Optional[Iterable[str]] = None) -> VerifyReport:
    """Run the checks named in `only` (all of them by default) and collect their results.

    A check whose inputs are out of range (too few excursions, a non-converged chain)
    is recorded as failed with the error message instead of aborting the suite.
    """
    config.require_supercritical("verify")
    selected = list(only) if only else list(CHECK_IDS)
    unknown = [name for name in selected if name not in CHECK_IDS]
    if unknown:
        raise PreconditionError(f"unknown checks: {', '.join(unknown)}; known: {', '.join(CHECK_IDS)}")
    ctx = VerifyContext(config)
    results = []
    for name, check in CHECKS:
        if name not in selected:
            continue
        started = time.perf_counter()
        try:
            result = check(ctx)
        except WalkLabError as exc:
            logger.warning("check %s could not run: %s", name, exc)
            result = CheckResult(name, name, None, None, False, {"error": str(exc)})
        logger.info("check %s: %s (%.1fs)", name, "pass" if result.passed else "FAIL",
                    time.perf_counter() - started)
        results.append(result)
    return VerifyReport(results)
