"""Exact identities and inequalities of the axis and cone problems, evaluated as residuals.

Everything here is built on the axis chain Green function, the quadrant exit kernel and
the time-resolved cone DP; the functions return plain dicts so they can be written as
artifacts or served over HTTP unchanged.
"""
from __future__ import annotations

import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import stats

from src.errors import PreconditionError
from src.exact.axis import axis_absorption, axis_chain
from src.exact.cone import boundary_coordinates, cone_exit
from src.exact.paths import log_shortest_path_prob, shortest_path_prob
from src.exact.quadrant import quadrant_kernel
from src.walk.lattice import ARMS, ORIGIN, LatticePoint, Region, WalkParams, classify, max_norm, neighbours


def _axis_kind(x: Tuple[int, int], what: str):
    kind = classify(x)
    if kind.region is Region.CONE:
        raise PreconditionError(f"{what} must lie on K^c, got {tuple(x)}")
    return kind


def reversibility_residual(x: Tuple[int, int], y: Tuple[int, int], alpha: float, R: int) -> float:
    """|P_x(X_rho = y') - [P(x->y)/P(y->x)] (|x|^a/|y|^a) P_y(X_rho = x')|.

    x' and y' are the first cone sides of x and y. Sites at distance 1 are excluded: their
    cone sides are corner cells shared with a second arm. The right-hand side is assembled
    in the log domain: the path ratio alone can exceed the float range.
    """
    kx, ky = _axis_kind(x, "x"), _axis_kind(y, "y")
    if kx.region is Region.ORIGIN or ky.region is Region.ORIGIN:
        raise PreconditionError("reversibility needs x, y != (0,0)")
    if kx.i < 2 or ky.i < 2:
        raise PreconditionError("reversibility is checked for sites at distance >= 2")
    params = WalkParams(alpha=alpha)
    chain = axis_chain(float(alpha), int(R))
    log_lhs = chain.log_exit_mass(x, y)
    log_rhs = (
        log_shortest_path_prob(x, y, params)
        - log_shortest_path_prob(y, x, params)
        + alpha * (math.log(kx.i) - math.log(ky.i))
        + chain.log_exit_mass(y, x)
    )
    return abs(math.exp(log_lhs) - math.exp(log_rhs))


def reverse_sum(x: Tuple[int, int], R: int, T: Optional[int] = None) -> Dict[str, float]:
    """Sum over y in the cone boundary of P_y(eta <= T, X_eta = x), truncated at radius R.

    `value` weights every boundary site by its number of axis neighbours (the corners
    (+-1,+-1) count twice); this weighted sum equals the total probability that the two
    cone neighbours of x ever reach K^c, so it increases to 2. `unweighted` is the plain
    site sum.
    """
    kind = _axis_kind(x, "x")
    if kind.region is Region.ORIGIN or kind.i >= R:
        return {"value": 0.0, "unweighted": 0.0, "deficit": 2.0 if kind.region is not Region.ORIGIN else 0.0}
    kernel = quadrant_kernel(int(R), T)
    i = kind.i
    per_quadrant = float(kernel.vertical[:, i - 1].sum() + kernel.horizontal[:, i - 1].sum())
    corner = float(kernel.vertical[0, i - 1])
    value = 2.0 * per_quadrant
    return {"value": value, "unweighted": value - 2.0 * corner, "deficit": 2.0 - value}


def reverse_sum_extrapolated(x: Tuple[int, int], R: int, T: Optional[int] = None) -> Dict[str, float]:
    """Richardson step on R assuming a deficit decaying like R^-2."""
    full = reverse_sum(x, R, T)
    half = reverse_sum(x, max(2, R // 2), T)
    extrapolated = full["value"] + (full["value"] - half["value"]) / 3.0
    return {**full, "half_radius_value": half["value"], "extrapolated": extrapolated}


def reverse_sum_dp(x: Tuple[int, int], R: int, T: int) -> Dict[str, float]:
    """Same weighted sum from one time-resolved DP per boundary site; for small R only."""
    _axis_kind(x, "x")
    value = 0.0
    unweighted = 0.0
    for s1 in (1, -1):
        for s2 in (1, -1):
            for a in range(1, R):
                for y in {(s1 * a, s2), (s1, s2 * a)}:
                    mass = cone_exit(y, R, T).site_law.mass(x)
                    weight = sum(1 for z in neighbours(y) if classify(z).region is not Region.CONE)
                    value += weight * mass
                    unweighted += mass
    return {"value": value, "unweighted": unweighted, "deficit": 2.0 - value}


def _paths_on_axes(x: Tuple[int, int], y: Tuple[int, int], steps: int, params: WalkParams) -> float:
    """P_x(X_steps = y, steps < rho) by summing the weights of every path on K^c."""
    total = 0.0
    stack: List[Tuple[Tuple[int, int], int, float]] = [(tuple(x), 0, 1.0)]
    while stack:
        site, k, weight = stack.pop()
        if k == steps:
            if site == tuple(y):
                total += weight
            continue
        kind = classify(site)
        for z in neighbours(site):
            if classify(z).region is Region.CONE:
                continue
            if kind.region is Region.ORIGIN:
                p = 0.25
            elif max_norm(z) > kind.i:
                p = params.outward(kind.i)
            else:
                p = params.inward(kind.i)
            stack.append(((z.x1, z.x2), k + 1, weight * p))
    return total


def inversion_residual(x: Tuple[int, int], y: Tuple[int, int], steps: int, alpha: float) -> float:
    """|P_x(X_n=y, n<rho) P(y->x) - P_y(X_n=x, n<rho) P(x->y)| by path enumeration."""
    _axis_kind(x, "x")
    _axis_kind(y, "y")
    if not 0 <= steps <= 8:
        raise PreconditionError("path enumeration is limited to n <= 8")
    params = WalkParams(alpha=alpha)
    lhs = _paths_on_axes(x, y, steps, params) * shortest_path_prob(y, x, params)
    rhs = _paths_on_axes(y, x, steps, params) * shortest_path_prob(x, y, params)
    return abs(lhs - rhs)


def exit_bracket_profile(alpha: float, R: int, i_max: int, i_min: int = 2) -> Dict[str, object]:
    """4 i^a P_{(0,i)}(X_rho=(1,i)) for i_min <= i <= i_max, with 1/(1-h(i)) alongside."""
    if i_max >= R or i_min < 2:
        raise PreconditionError(f"need 2 <= i_min <= i_max < R, got [{i_min}, {i_max}] with R={R}")
    chain = axis_chain(float(alpha), int(R))
    rows = []
    for i in range(i_min, i_max + 1):
        law = chain.exit_law(ARMS[2], i)
        value = 4.0 * math.exp(alpha * math.log(i)) * law.mass((1, i))
        h = chain.return_probability(i)
        rows.append({
            "i": i,
            "value": value,
            "inverse_escape": 1.0 / (1.0 - h),
            "return_probability": h,
            "upper": 1.0 + 10.0 * i ** (-alpha),
        })
    values = [r["value"] for r in rows]
    return {
        "rows": rows,
        "bracket_holds": all(1.0 < r["value"] < r["upper"] for r in rows),
        "decreasing": all(b < a for a, b in zip(values, values[1:])),
    }


def infinite_product_bound(alpha: float, cutoff: int = 1_000_000) -> float:
    """a/16 with a = prod_{i>=1} (1 - 3/(4 i^alpha))."""
    if alpha <= 1:
        raise PreconditionError(f"the product converges for alpha > 1 only, got {alpha}")
    i = np.arange(1, cutoff + 1, dtype=float)
    log_a = float(np.log1p(-0.75 * np.exp(-alpha * np.log(i))).sum())
    log_a -= 0.75 * cutoff ** (1.0 - alpha) / (alpha - 1.0)
    return math.exp(log_a) / 16.0


def infcone_check(alpha: float, R: int, radius: int) -> Dict[str, object]:
    """min over axis sites x with max-norm <= radius of P_x(X_rho = (1,1)), against a/16."""
    if radius >= R:
        raise PreconditionError(f"radius must be < R, got {radius} with R={R}")
    chain = axis_chain(float(alpha), int(R))
    worst, argmin = math.inf, ORIGIN
    starts = [(None, 0, ORIGIN)] + [(arm, i, arm.site(i)) for arm in ARMS for i in range(1, radius + 1)]
    for arm, d, site in starts:
        _, green = chain.green_row(arm, d)
        # (1,1) is fed by (1,0) and (0,1)
        p = float((green[0, 0] + green[2, 0]) * chain.q[0])
        if p < worst:
            worst, argmin = p, site
    bound = infinite_product_bound(alpha)
    return {"minimum": worst, "argmin": list(argmin), "bound": bound, "holds": worst > bound}


def exit_comparison(alpha: float, R: int, i: int, radius: int) -> Dict[str, object]:
    """Comparison of P(z->(0,i)) with 4 i^a P_z(X_rho=(1,i)) over axis sites z within radius."""
    if i < 2 or radius >= R or i >= R:
        raise PreconditionError(f"need i >= 2 and i, radius < R (i={i}, radius={radius}, R={R})")
    params = WalkParams(alpha=alpha)
    chain = axis_chain(float(alpha), int(R))
    target = LatticePoint(0, i)
    scale = 4.0 * math.exp(alpha * math.log(i))
    lower_holds = True
    ray, off_ray = [], 0.0
    sup_return = 0.0
    starts = [(None, 0, ORIGIN)] + [(arm, d, arm.site(d)) for arm in ARMS for d in range(1, radius + 1)]
    for arm, d, z in starts:
        _, green = chain.green_row(arm, d)
        hit = float(green[2, i - 1] * chain.q[i - 1])
        middle = scale * hit
        path = shortest_path_prob(z, target, params)
        lower_holds &= path <= middle * (1.0 + 1e-12)
        if z.x1 == 0 and z.x2 >= i:
            ray.append({"z2": z.x2, "ratio": middle / path})
        elif z != target:
            off_ray = max(off_ray, hit * math.exp(2.0 * alpha * math.log(i)))
        if d > 0:
            sup_return = max(sup_return, chain.return_probability(d))
    return {
        "i": i,
        "lower_holds": bool(lower_holds),
        "ray": ray,
        "off_ray_scaled_max": off_ray,
        "sup_return_probability": sup_return,
        "return_below_one": sup_return < 1.0,
    }


def exit_norm_tail(y: Tuple[int, int], R: int, T: Optional[int] = None) -> Dict[str, object]:
    """r^2 P_y(max-norm of X_eta > r) / |y| over 1 <= r < R-1, from the quadrant kernel."""
    s1, s2, a, swapped = boundary_coordinates(y)
    if a >= R:
        raise PreconditionError(f"start {tuple(y)} lies outside the truncation radius R={R}")
    kernel = quadrant_kernel(int(R), T)
    h, v = kernel.row(a)
    exits = h + v
    tail = exits[::-1].cumsum()[::-1]
    r = np.arange(1, kernel.n)
    ratio = r ** 2 * tail[1:] / max_norm(y)
    return {
        "y": list(y),
        "r": r.tolist(),
        "tail": tail[1:].tolist(),
        "ratio": ratio.tolist(),
        "max_ratio": float(ratio.max()) if len(ratio) else 0.0,
        "deficit": float(kernel.deficit()[a - 1]),
    }


def exit_norm_moments(alpha: float, R: int, i_max: int, beta: float = 1.0) -> Dict[str, object]:
    """E_{(0,i)}[max-norm(X_rho)^beta] for 1 <= i <= i_max; bounded uniformly in i."""
    if i_max >= R:
        raise PreconditionError(f"i_max must be < R, got {i_max} with R={R}")
    chain = axis_chain(float(alpha), int(R))
    values = chain.exit_norm_moment(beta)[1 : i_max + 1]
    return {"beta": beta, "values": values.tolist(), "max": float(values.max())}


def axis_time_moments(alpha: float, R: int, i: int) -> Dict[str, float]:
    """E_{(0,i)}[rho]/i and E_{(0,i)}[rho^2]/i^2."""
    result = axis_absorption((0, i), alpha, R)
    return {
        "i": i,
        "rho_ratio": result.expected_rho / i,
        "rho_sq_ratio": result.expected_rho_sq / i ** 2,
        "deficit": result.absorption_law.deficit,
    }


def survival_slope(alpha: float, R: int, start: Tuple[int, int], m_lo: int, m_hi: int) -> Dict[str, float]:
    """Log-log slope of P_start(rho > m) over m_lo <= m <= m_hi."""
    survival = axis_absorption(start, alpha, R, M=m_hi).survival
    ms = np.arange(m_lo, m_hi + 1)
    ps = np.array([survival[int(m)] for m in ms])
    keep = ps > 0
    if keep.sum() < 2:
        return {"slope": -math.inf, "points": int(keep.sum())}
    fit = stats.linregress(np.log(ms[keep]), np.log(ps[keep]))
    return {"slope": float(fit.slope), "points": int(keep.sum()), "at_lo": float(ps[0]), "at_hi": float(ps[-1])}
