"""Exact one-dimensional walk probabilities in the log domain, and their Gaussian forms.

Z is the simple symmetric walk on Z. P_x(min Z > 0, Z_k = y) follows from the
reflection principle as a difference of two binomial points; all binomial coefficients
go through log-gamma so horizons of 10^6 steps are fine.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import stats
from scipy.special import gammaln

from src.errors import PreconditionError

LOG2 = math.log(2.0)


class BinomialPoint(NamedTuple):
    exact: float
    gaussian: float


class ChernoffWindow(NamedTuple):
    lo: int
    hi: int
    bound: float


class BallotQuery(NamedTuple):
    start: int
    end: int
    steps: int

    @property
    def feasible(self) -> bool:
        return self.steps >= abs(self.start - self.end) and (self.steps - self.start + self.end) % 2 == 0


def log_binom(n, m):
    return gammaln(np.asarray(n, dtype=float) + 1) - gammaln(np.asarray(m, dtype=float) + 1) - gammaln(
        np.asarray(n, dtype=float) - np.asarray(m, dtype=float) + 1
    )


def log_point(k, d) -> np.ndarray:
    """log P_0(Z_k = d), -inf on a parity mismatch or |d| > k. Vectorised over k and d."""
    k = np.asarray(k, dtype=np.int64)
    d = np.abs(np.asarray(d, dtype=np.int64))
    k, d = np.broadcast_arrays(k, d)
    out = np.full(k.shape, -np.inf)
    ok = (d <= k) & ((k - d) % 2 == 0)
    kk, dd = k[ok].astype(float), d[ok].astype(float)
    out[ok] = gammaln(kk + 1) - gammaln((kk + dd) / 2 + 1) - gammaln((kk - dd) / 2 + 1) - kk * LOG2
    return out


def binomial_point(k: int, x: int) -> BinomialPoint:
    """2^-k C(k, (k-x)/2) and its Gaussian approximation sqrt(2/(pi k)) exp(-x^2/(2k))."""
    if k < 1:
        raise PreconditionError(f"k must be >= 1, got {k}")
    exact = float(np.exp(log_point(k, x)))
    gaussian = math.sqrt(2.0 / (math.pi * k)) * math.exp(-x * x / (2.0 * k))
    return BinomialPoint(exact, gaussian)


def log_stay_positive_at(x, y, k) -> np.ndarray:
    """log P_x(min_{j<=k} Z_j > 0, Z_k = y), vectorised over y and k (k = 0 allowed)."""
    la = log_point(k, y - x)
    lb = log_point(k, y + x)
    out = np.full(la.shape, -np.inf)
    ok = np.isfinite(la)
    with np.errstate(divide="ignore"):
        out[ok] = la[ok] + np.log(-np.expm1(lb[ok] - la[ok]))
    return out


def reflection_stay_positive(x: int, y: int, k: int) -> float:
    """P_x(Z stays > 0 up to k, Z_k = y) = 2^-k [C(k,(k-(y-x))/2) - C(k,(k-(x+y))/2)]."""
    if x < 1 or y < 1 or k < 1:
        raise PreconditionError(f"need x, y, k >= 1, got x={x}, y={y}, k={k}")
    return float(np.exp(log_stay_positive_at(x, y, np.array([k]))[0]))


def stay_positive(u: int, m: int, method: str = "closed") -> float:
    """P_u(min_{j<=m} Z_j > 0).

    "closed" uses P_0(-u < Z_m <= u) from the binomial CDF; "sum" adds the reflection
    probabilities of every reachable endpoint.
    """
    if u < 1 or m < 1:
        raise PreconditionError(f"need u, m >= 1, got u={u}, m={m}")
    if method == "sum":
        ys = np.arange(1, u + m + 1)
        logs = log_stay_positive_at(u, ys, m)
        return float(np.exp(logs).sum())
    if method != "closed":
        raise PreconditionError(f"unknown method {method!r}")
    return float(_survival(u, np.array([m]))[0])


def _survival(u: int, m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.int64)
    hi = np.floor_divide(m + u, 2)
    lo = np.floor_divide(m - u, 2)
    return stats.binom.cdf(hi, m, 0.5) - stats.binom.cdf(lo, m, 0.5)


def log_survival_table(u: int, horizon: int) -> np.ndarray:
    """log P_u(min_{j<=m} Z_j > 0) for m = 0..horizon."""
    m = np.arange(horizon + 1)
    with np.errstate(divide="ignore"):
        return np.log(np.clip(_survival(u, m), 0.0, 1.0))


def log_ballot_table(x: int, y: int, horizon: int) -> np.ndarray:
    """log P_x(Z stays > 0, Z_m = y) for m = 0..horizon."""
    return log_stay_positive_at(x, y, np.arange(horizon + 1))


def _window(k: int, eps: float):
    centre = (k - 1) / 2.0
    lo = math.ceil(centre * (1.0 - eps) - 1e-9)
    hi = math.floor(centre * (1.0 + eps) + 1e-9)
    return lo, hi


def chernoff_window_bound(k: int, eps: float) -> ChernoffWindow:
    """Window B_{k,eps} = [(k-1)(1-eps)/2, (k-1)(1+eps)/2] and the bound exp(-eps^2 k/6)."""
    if k < 1 or not 0.0 < eps < 1.0:
        raise PreconditionError(f"need k >= 1 and 0 < eps < 1, got k={k}, eps={eps}")
    lo, hi = _window(k, eps)
    return ChernoffWindow(lo, hi, math.exp(-eps * eps * k / 6.0))


def outside_window_mass(k: int, eps: float) -> float:
    """P(Bin(k-1, 1/2) outside B_{k,eps}), exact."""
    lo, hi = _window(k, eps)
    n = k - 1
    return float(stats.binom.cdf(lo - 1, n, 0.5) + stats.binom.sf(hi, n, 0.5))


def window_mass(k: int, eps: float) -> dict:
    """Binomial mass inside B_{k,eps}, with sqrt(k)(1 - mass) alongside."""
    w = chernoff_window_bound(k, eps)
    inside = 1.0 - outside_window_mass(k, eps)
    return {"k": k, "eps": eps, "lo": w.lo, "hi": w.hi, "mass": inside, "scaled_gap": math.sqrt(k) * (1.0 - inside),
            "chernoff_bound": w.bound}


def ballot_asymptotic(x: int, y: int, k: int) -> dict:
    """Exact P_x(Z stays > 0, Z_k = y) next to its Gaussian companion."""
    exact = reflection_stay_positive(x, y, k)
    c = math.sqrt(2.0 / math.pi)
    if x == 1 and y == 1:
        approx = c * 2.0 / (k + 1) ** 1.5
    elif y == 1:
        approx = c * 2.0 * x * math.exp(-x * x / (2.0 * (k + 1))) / (k + 1) ** 1.5
    elif x == 1:
        approx = c * 2.0 * y / (k + 1) ** 1.5
    else:
        approx = c * 2.0 * x * y * math.exp(-x * x / (2.0 * k)) / k ** 1.5
    feasible = BallotQuery(x, y, k).feasible
    return {"x": x, "y": y, "k": k, "exact": exact, "gaussian": approx if feasible else 0.0,
            "ratio": exact / approx if feasible and approx > 0 else None}


def be3_check(x: int = 50, eps: float = 0.3, k_lo: int = None, k_hi: int = None) -> dict:
    """max over j in B_{k,eps} of P(Z_j >= x-1) against exp(-x^2/(6k)), for k in [x, x^1.9]."""
    k_lo = x if k_lo is None else k_lo
    k_hi = int(math.floor(x ** 1.9)) if k_hi is None else k_hi
    worst = -math.inf
    worst_k = k_lo
    for k in range(k_lo, k_hi + 1):
        lo, hi = _window(k, eps)
        if hi < 0:
            continue
        # P(Z_j >= x-1) increases with j, so the window's right end is the maximum
        j = hi
        threshold = math.ceil((j + x - 1) / 2.0)
        tail = float(stats.binom.sf(threshold - 1, j, 0.5)) if j > 0 else float(x - 1 <= 0)
        log_ratio = (math.log(tail) if tail > 0 else -math.inf) + x * x / (6.0 * k)
        if log_ratio > worst:
            worst, worst_k = log_ratio, k
    return {"x": x, "eps": eps, "k_range": [k_lo, k_hi], "max_log_ratio": worst, "worst_k": worst_k,
            "holds": worst <= 0.0}


def binomial_gap_scaled(x: int = 100, delta: float = 0.5) -> dict:
    """max over y <= x^(1-delta), k in [x^2, 2x^2] (parity matched) of |exact/sqrt(2/(pi k)) - 1| k / y^2."""
    y_max = int(math.floor(x ** (1.0 - delta)))
    worst = 0.0
    for y in range(1, y_max + 1):
        k = np.arange(x * x, 2 * x * x + 1)
        k = k[(k - y) % 2 == 0]
        exact = np.exp(log_point(k, y))
        gap = np.abs(exact / np.sqrt(2.0 / (np.pi * k)) - 1.0)
        worst = max(worst, float((gap * k / (y * y)).max()))
    return {"x": x, "delta": delta, "y_max": y_max, "max_scaled_gap": worst}
