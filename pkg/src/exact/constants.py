from __future__ import annotations

import math
from typing import Dict, Iterable, Optional

import numpy as np

from src.errors import PreconditionError
from src.exact.axis import axis_chain
from src.exact.invariant import DEFAULT_MAX_ITER, DEFAULT_TOL, solve_invariants
from src.walk.functionals import BUILTIN_IDS

# x^3 P_(1,x)(X_eta = (1,0)) and k^2 P_(1,1)(eta = k) both tend to 4/pi for the simple walk
# in the quadrant; the constants below are assembled from these two limits.
LOCAL_LIMIT = 4.0 / math.pi
EXIT_TIME_LIMIT = 4.0 / math.pi

# per-start expectation of each built-in functional over one axis segment
_SEGMENT_EXPECTATIONS = {
    "axis_local_time": "expected_rho",
    "origin_local_time": "origin_visits",
}


def constants(
    alpha: float,
    R: int,
    functionals: Optional[Iterable[str]] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    allow_subcritical: bool = False,
) -> Dict[str, float]:
    """Limit constants from the embedded invariant laws on the sites of max-norm < R.

    Besides c0, c1, c2, c and c_prime the mapping carries the expectations they are built
    from (`E_pi_dagger_norm`, `E_pi_star_rho`, ...), the cone-time target and the
    truncation diagnostics, so every internal identity can be checked on the returned
    values alone.

    A cone excursion started at y lasts longer than t with probability about
    EXIT_TIME_LIMIT |y| / t, so the cone time of m excursions grows like
    cone_time_target m log m with cone_time_target = EXIT_TIME_LIMIT E_{pi-dagger}[norm],
    and c1 is its inverse. c0 = LOCAL_LIMIT E_{pi*}[norm of X_rho] and
    c2 = LOCAL_LIMIT / 8 E_{pi-dagger}[norm] follow from the exit-site law.
    With `allow_subcritical` the truncated values are returned for 1 < alpha <= 3 as well;
    they then depend on R and have no limit.
    """
    if alpha <= 3 and not allow_subcritical:
        raise PreconditionError(f"limit constants need alpha > 3, got {alpha}")
    pair = solve_invariants(float(alpha), int(R), None, float(tol), int(max_iter))
    chain = axis_chain(float(alpha), int(R))
    d = pair.kernels.axis_distance
    pi_star, pi_dagger = pair.entry, pair.exit

    e_norm_dagger = float(pi_dagger @ pair.kernels.boundary_norm)
    e_exit_norm = float(pi_star @ chain.exit_norm_moment(1.0)[d])
    cone_time_target = EXIT_TIME_LIMIT * e_norm_dagger
    c1 = 1.0 / cone_time_target
    out: Dict[str, float] = {
        "alpha": float(alpha),
        "R": int(R),
        "E_pi_dagger_norm": e_norm_dagger,
        "E_pi_star_exit_norm": e_exit_norm,
        "E_pi_star_norm": float(pi_star @ d.astype(float)),
        "c0": LOCAL_LIMIT * e_exit_norm,
        "c1": c1,
        "c2": LOCAL_LIMIT / 8.0 * e_norm_dagger,
        "cone_time_target": cone_time_target,
        "leak": pair.leak,
        "iterations": pair.iterations,
        "entry_residual": pair.entry_residual,
        "exit_residual": pair.exit_residual,
    }
    expectations = {
        "expected_rho": float(pi_star @ chain.expected_rho[d]),
        "origin_visits": float(pi_star @ chain.origin_visits[d]),
    }
    out["E_pi_star_rho"] = expectations["expected_rho"]
    out["E_pi_star_origin_visits"] = expectations["origin_visits"]
    out["c"] = c1 * expectations["expected_rho"]
    out["c_prime"] = c1 * expectations["origin_visits"]
    for fid in functionals or BUILTIN_IDS:
        if fid not in _SEGMENT_EXPECTATIONS:
            raise PreconditionError(f"no exact segment expectation for functional {fid!r}")
        mean = expectations[_SEGMENT_EXPECTATIONS[fid]]
        out[f"E_pi_star_f:{fid}"] = mean
        out[f"c_f:{fid}"] = c1 * mean
    return out


def segment_expectation(fid: str, alpha: float, R: int) -> np.ndarray:
    """E_d[f(B_0)] per start distance d, for a built-in functional."""
    if fid not in _SEGMENT_EXPECTATIONS:
        raise PreconditionError(f"no exact segment expectation for functional {fid!r}")
    return getattr(axis_chain(float(alpha), int(R)), _SEGMENT_EXPECTATIONS[fid])
