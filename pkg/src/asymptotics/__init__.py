"""One-dimensional ballot probabilities and the semi-analytic cone exit laws built on them."""
from src.asymptotics.ballot import (
    BallotQuery,
    binomial_point,
    chernoff_window_bound,
    reflection_stay_positive,
    stay_positive,
    window_mass,
)
from src.asymptotics.semianalytic import SemiAnalyticResult, cone_exit_semianalytic, eta_tail_semianalytic

__all__ = [
    "BallotQuery",
    "SemiAnalyticResult",
    "binomial_point",
    "chernoff_window_bound",
    "cone_exit_semianalytic",
    "eta_tail_semianalytic",
    "reflection_stay_positive",
    "stay_positive",
    "window_mass",
]
