"""Cone exit laws of the planar walk from one-dimensional ballot probabilities.

The planar simple walk is a uniform mixture of a horizontal and a vertical walk: among
the first k-1 steps, j are horizontal with probability C(k-1, j) 2^-(k-1). Started at
(1,x), the walk leaves the quadrant at time k through (y,0) iff the horizontal walk goes
1 -> y staying positive in j steps, the vertical one goes x -> 1 staying positive in the
other k-1-j steps, and the last step goes down (probability 1/4). Summing over k and j
gives the exit law; the j-sum is restricted to a binomial window around (k-1)/2 and the
mass left outside it is charged to the error budget.

The window half-width is chosen per horizon, eps_k = min(1, sqrt(6 L / k)) with L = 60, so
the Chernoff factor e^(-eps_k^2 k / 6) is e^-60 wherever the window is cut and the window
is the full range for k <= 360. Passing `eps` (0.3 is the customary value) fixes the width
instead. The Chernoff bound is part of the reported budget, next to the exact
outside-window mass and the horizon tail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Literal, Optional, Tuple

import numpy as np
from scipy import stats
from scipy.special import gammaln

from src.asymptotics.ballot import LOG2, log_ballot_table, log_survival_table
from src.errors import PreconditionError
from src.logs import get_logger

logger = get_logger(__name__)

DEFAULT_WINDOW_LEVEL = 60.0
K_BLOCK = 128


@dataclass
class SemiAnalyticResult:
    value: float
    window_budget: float
    chernoff_budget: float
    tail_budget: float
    K_max: int

    @property
    def budget(self) -> float:
        return self.window_budget + self.chernoff_budget + self.tail_budget

    def to_dict(self) -> Dict[str, float]:
        return {
            "value": self.value,
            "budget": self.budget,
            "window_budget": self.window_budget,
            "chernoff_budget": self.chernoff_budget,
            "tail_budget": self.tail_budget,
            "K_max": self.K_max,
        }


def window_eps(k: np.ndarray, level: float = DEFAULT_WINDOW_LEVEL, eps: Optional[float] = None) -> np.ndarray:
    """Half-width of the binomial window per horizon: fixed, or min(1, sqrt(6 level / k))."""
    k = np.asarray(k, dtype=float)
    if eps is not None:
        return np.full(k.shape, float(eps))
    return np.minimum(1.0, np.sqrt(6.0 * level / k))


def _windows(k: np.ndarray, eps: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    centre = (k - 1) / 2.0
    lo = np.maximum(0, np.ceil(centre * (1.0 - eps) - 1e-9)).astype(np.int64)
    hi = np.minimum(k - 1, np.floor(centre * (1.0 + eps) + 1e-9)).astype(np.int64)
    return lo, hi


def _budgets(k: np.ndarray, eps: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> Tuple[float, float]:
    """(exact outside-window binomial mass, Chernoff count bound), summed over horizons."""
    n = k - 1
    outside = stats.binom.cdf(lo - 1, n, 0.5) + stats.binom.sf(hi, n, 0.5)
    n_out = np.maximum(0, k - (hi - lo + 1))
    chernoff = np.where(eps < 1.0, n_out * np.exp(-eps * eps * k / 6.0), 0.0)
    return float(outside.sum()), float(chernoff.sum())


def _mixture_sum(
    a: Tuple[int, int],
    b: Tuple[int, int],
    K: int,
    level: float,
    eps: Optional[float],
) -> Tuple[float, float, float]:
    """sum_{k<=K} sum_{j in window} C(k-1,j) 2^-(k-1) P_a0(->a1, j) P_b0(->b1, k-1-j).

    Returns (sum, outside-window mass, Chernoff bound), all without the final 1/4.
    """
    log_fact = gammaln(np.arange(K + 1, dtype=float) + 1.0)
    log_a = log_ballot_table(a[0], a[1], K)
    log_b = log_ballot_table(b[0], b[1], K)
    parity_j = (a[1] - a[0]) % 2
    parity_n = (a[1] - a[0] + b[1] - b[0]) % 2
    ks = np.arange(1, K + 1, dtype=np.int64)
    ks = ks[(ks - 1) % 2 == parity_n]
    total = 0.0
    outside = 0.0
    chernoff = 0.0
    for start in range(0, len(ks), K_BLOCK):
        k = ks[start : start + K_BLOCK]
        e = window_eps(k, level, eps)
        lo, hi = _windows(k, e)
        out, cb = _budgets(k, e, lo, hi)
        outside += out
        chernoff += cb
        first = lo + (lo - parity_j) % 2
        widths = np.maximum(0, (hi - first) // 2 + 1)
        W = int(widths.max()) if len(widths) else 0
        if W == 0:
            continue
        offs = np.arange(W)
        mask = offs[None, :] < widths[:, None]
        n = (k - 1)[:, None]
        j = np.where(mask, first[:, None] + 2 * offs[None, :], 0)
        m = n - j
        with np.errstate(invalid="ignore"):
            log_term = log_fact[n] - log_fact[j] - log_fact[m] - n * LOG2 + log_a[j] + log_b[m]
            terms = np.where(mask, np.exp(log_term), 0.0)
        total += float(terms.sum())
    return total, outside, chernoff


def _tail_estimate(a_scale: int, b_scale: int, K: int, level: float, eps: Optional[float]) -> float:
    """Budget for the horizons beyond K, 8 a b / (pi (1-eps)^3 (K-1)^2).

    Their asymptotic mass is 2 a b / (pi K^2).
    """
    e = float(window_eps(np.array([K]), level, eps)[0])
    e = min(e, 0.5)
    return 8.0 * a_scale * b_scale / (math.pi * (1.0 - e) ** 3 * max(1, K - 1) ** 2)


def cone_exit_semianalytic(
    x: int,
    y: int,
    K_max: Optional[int] = None,
    target: Literal["horizontal", "vertical", "swapped"] = "horizontal",
    level: float = DEFAULT_WINDOW_LEVEL,
    eps: Optional[float] = None,
) -> SemiAnalyticResult:
    """P_{(1,x)}(X_eta = (y,0)) (horizontal), P_{(1,x)}(X_eta = (0,y)) (vertical), or
    P_{(y,1)}(X_eta = (0,x)) (swapped), summed over horizons k <= K_max (default 100 x^2)."""
    if x < 1 or y < 1:
        raise PreconditionError(f"need x, y >= 1, got x={x}, y={y}")
    K = int(K_max) if K_max is not None else 100 * x * x
    if K < 1:
        raise PreconditionError(f"K_max must be >= 1, got {K}")
    if target == "horizontal":
        a, b = (1, y), (x, 1)
    elif target == "vertical":
        a, b = (1, 1), (x, y)
    elif target == "swapped":
        a, b = (y, 1), (1, x)
    else:
        raise PreconditionError(f"unknown target {target!r}")
    total, outside, chernoff = _mixture_sum(a, b, K, level, eps)
    result = SemiAnalyticResult(
        value=0.25 * total,
        window_budget=0.25 * outside,
        chernoff_budget=0.25 * chernoff,
        tail_budget=_tail_estimate(max(a), max(b), K, level, eps),
        K_max=K,
    )
    logger.debug("semi-analytic exit x=%d y=%d %s K=%d: %.6e", x, y, target, K, result.value)
    return result


def eta_tail_semianalytic(
    start: Tuple[int, int],
    k: int,
    level: float = DEFAULT_WINDOW_LEVEL,
    eps: Optional[float] = None,
) -> SemiAnalyticResult:
    """P_start(eta = k) for start (1,x) or (x,1).

    Either the vertical walk reaches 0 last (the horizontal one only has to stay positive),
    or the horizontal one does.
    """
    s1, s2 = abs(start[0]), abs(start[1])
    if min(s1, s2) != 1 or start[0] == 0 or start[1] == 0:
        raise PreconditionError(f"start must be (1,x) or (x,1), got {tuple(start)}")
    x = max(s1, s2)
    if k < x:
        raise PreconditionError(f"need k >= x, got k={k}, x={x}")
    log_fact = gammaln(np.arange(k + 1, dtype=float) + 1.0)
    surv_1 = log_survival_table(1, k)
    surv_x = log_survival_table(x, k)
    to_one_from_x = log_ballot_table(x, 1, k)
    to_one_from_1 = log_ballot_table(1, 1, k)
    kk = np.array([k], dtype=np.int64)
    e = window_eps(kk, level, eps)
    lo, hi = _windows(kk, e)
    outside, chernoff = _budgets(kk, e, lo, hi)
    j = np.arange(int(lo[0]), int(hi[0]) + 1)
    m = (k - 1) - j
    log_binom = log_fact[k - 1] - log_fact[j] - log_fact[m] - (k - 1) * LOG2
    terms = np.exp(log_binom + surv_1[j] + to_one_from_x[m]) + np.exp(log_binom + to_one_from_1[j] + surv_x[m])
    return SemiAnalyticResult(
        value=0.25 * float(terms.sum()),
        window_budget=0.5 * outside,
        chernoff_budget=0.5 * chernoff,
        tail_budget=0.0,
        K_max=k,
    )
