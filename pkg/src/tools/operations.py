"""Named exact-solver and asymptotics operations, callable with string or JSON arguments.

Used by the `exact` subcommand and by POST /exact. Operations are imported lazily, so
listing the registry does not pull in scipy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, FrozenSet, List, Mapping, Optional, Tuple

from pydantic import ValidationError, validate_call

from src.errors import PreconditionError, WalkLabError
from src.logs import get_logger
from src.walk.lattice import LatticePoint

logger = get_logger(__name__)


@dataclass(frozen=True)
class Operation:
    name: str
    module: str
    function: str
    description: str
    points: FrozenSet[str] = frozenset()

    def describe(self) -> Dict[str, Any]:
        return {"name": self.name, "description": self.description, "point_arguments": sorted(self.points)}


def _op(name: str, module: str, function: str, description: str, *points: str) -> Operation:
    return Operation(name, module, function, description, frozenset(points))


def transition_row(p: Tuple[int, int], alpha: float) -> Dict[str, Any]:
    from src.walk.lattice import WalkParams, transition_distribution

    dist = transition_distribution(p, WalkParams(alpha=alpha))
    return {"site": list(p), "outcomes": [[q.x1, q.x2, prob] for q, prob in dist], "total": dist.total()}


def path_probability(x: Tuple[int, int], y: Tuple[int, int], alpha: float) -> Dict[str, Any]:
    from src.exact.paths import axis_path, shortest_path_prob
    from src.walk.lattice import WalkParams

    return {
        "path": [list(s) for s in axis_path(x, y)],
        "probability": shortest_path_prob(x, y, WalkParams(alpha=alpha)),
    }


_OPERATIONS = [
    _op("transition-distribution", __name__, "transition_row",
        "one-step law at a site", "p"),
    _op("kernel-soundness", "src.walk.lattice", "kernel_soundness",
        "row sums and dihedral symmetry of the kernel"),
    _op("shortest-path-prob", __name__, "path_probability",
        "product of step probabilities along the shortest axis path", "x", "y"),
    _op("axis-absorption", "src.exact.axis", "axis_absorption",
        "law of X_rho and moments of rho from an axis site", "start"),
    _op("cone-exit", "src.exact.cone", "cone_exit",
        "time-resolved law of (X_eta, eta) from a cone site", "start"),
    _op("cone-exit-kernel", "src.exact.cone", "cone_exit_kernel",
        "law of X_eta from a cone boundary site (closed form)", "y"),
    _op("embedded-invariant", "src.exact.invariant", "embedded_invariant",
        "invariant law of the entry or exit chain"),
    _op("reversibility-residual", "src.exact.identities", "reversibility_residual",
        "residual of the axis reversibility identity", "x", "y"),
    _op("reverse-sum", "src.exact.identities", "reverse_sum_extrapolated",
        "weighted boundary sum of exit probabilities into x, with its extrapolation in R", "x"),
    _op("reverse-sum-dp", "src.exact.identities", "reverse_sum_dp",
        "the same boundary sum from one DP per boundary site", "x"),
    _op("inversion-residual", "src.exact.identities", "inversion_residual",
        "residual of the path inversion identity by enumeration", "x", "y"),
    _op("exit-bracket-profile", "src.exact.identities", "exit_bracket_profile",
        "4 i^alpha P_(0,i)(X_rho=(1,i)) and the return-probability profile"),
    _op("infcone-check", "src.exact.identities", "infcone_check",
        "minimum probability of entering the cone at (1,1)"),
    _op("exit-comparison", "src.exact.identities", "exit_comparison",
        "comparison of path probabilities with exit probabilities"),
    _op("exit-norm-tail", "src.exact.identities", "exit_norm_tail",
        "scaled tail of the cone exit norm", "y"),
    _op("exit-norm-moments", "src.exact.identities", "exit_norm_moments",
        "moments of the axis exit norm per start"),
    _op("axis-time-moments", "src.exact.identities", "axis_time_moments",
        "scaled first and second moments of rho"),
    _op("survival-slope", "src.exact.identities", "survival_slope",
        "log-log slope of P(rho > m)", "start"),
    _op("binomial-point", "src.asymptotics.ballot", "binomial_point",
        "2^-k C(k,(k-x)/2) and its Gaussian form"),
    _op("reflection-stay-positive", "src.asymptotics.ballot", "reflection_stay_positive",
        "P_x(Z stays positive, Z_k = y)"),
    _op("stay-positive", "src.asymptotics.ballot", "stay_positive",
        "P_u(Z stays positive up to m)"),
    _op("chernoff-window-bound", "src.asymptotics.ballot", "chernoff_window_bound",
        "binomial window and its Chernoff bound"),
    _op("window-mass", "src.asymptotics.ballot", "window_mass",
        "exact binomial mass inside the window"),
    _op("ballot-asymptotic", "src.asymptotics.ballot", "ballot_asymptotic",
        "ballot probability next to its Gaussian companion"),
    _op("be3-check", "src.asymptotics.ballot", "be3_check",
        "window tail bound over a grid of horizons"),
    _op("binomial-gap-scaled", "src.asymptotics.ballot", "binomial_gap_scaled",
        "scaled gap between binomial points and their Gaussian form"),
    _op("cone-exit-semianalytic", "src.asymptotics.semianalytic", "cone_exit_semianalytic",
        "cone exit probability from ballot probabilities, with error budget"),
    _op("eta-tail-semianalytic", "src.asymptotics.semianalytic", "eta_tail_semianalytic",
        "P(eta = k) from ballot probabilities, with error budget", "start"),
]

OPERATIONS: Dict[str, Operation] = {op.name: op for op in _OPERATIONS}


def list_operations() -> List[Dict[str, Any]]:
    return [OPERATIONS[name].describe() for name in sorted(OPERATIONS)]


def _import_operation(op: Operation) -> Callable:
    mod = __import__(op.module, fromlist=[op.function])
    return getattr(mod, op.function)


def normalize_name(name: str) -> str:
    return name.strip().lower().replace("_", "-")


def _parse_arguments(op: Operation, arguments: Mapping[str, Any]) -> Dict[str, Any]:
    out = {}
    for key, value in arguments.items():
        key = key.replace("-", "_")
        if key in op.points and isinstance(value, str):
            value = tuple(LatticePoint.parse(value))
        elif key in op.points and isinstance(value, (list, tuple)):
            value = tuple(int(v) for v in value)
        out[key] = value
    return out


def jsonable(value: Any) -> Any:
    """Plain JSON values: numpy scalars and arrays unwrapped, tuples as lists, NaN/inf as None."""
    if isinstance(value, LatticePoint):
        return [int(value.x1), int(value.x2)]
    if hasattr(value, "to_dict"):
        return jsonable(value.to_dict())
    if hasattr(value, "_asdict"):
        return jsonable(value._asdict())
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return jsonable(value.tolist())
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if hasattr(value, "value") and isinstance(value.value, str):
        return value.value
    return str(value)


def _as_document(result: Any) -> Dict[str, Any]:
    doc = jsonable(result)
    if isinstance(doc, dict):
        return doc
    if isinstance(doc, list) and all(isinstance(r, dict) for r in doc):
        return {"rows": doc}
    return {"value": doc}


def run_operation(name: str, arguments: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Run a named operation.

    Returns:
      { "status": "success", "operation": ..., "arguments": {...}, "result": {...} }
    or on error:
      { "status": "error", "kind": "precondition" | "failure", "message": "..." }
    """
    key = normalize_name(name or "")
    op = OPERATIONS.get(key)
    if op is None:
        return {"status": "error", "kind": "precondition",
                "message": f"unknown operation {name!r}; known: {', '.join(sorted(OPERATIONS))}"}
    try:
        kwargs = _parse_arguments(op, arguments or {})
        func = validate_call(_import_operation(op))
        result = func(**kwargs)
    except (ValidationError, TypeError) as exc:
        logger.info("bad arguments for %s: %s", key, exc)
        return {"status": "error", "kind": "precondition", "message": f"bad arguments for {key}: {exc}"}
    except WalkLabError as exc:
        logger.info("%s refused: %s", key, exc)
        kind = "precondition" if isinstance(exc, PreconditionError) else "failure"
        return {"status": "error", "kind": kind, "message": str(exc)}
    except Exception as exc:
        logger.exception("operation %s failed: %s", key, exc)
        return {"status": "error", "kind": "failure", "message": f"{key} failed: {exc}"}
    logger.info("operation %s done", key)
    return {"status": "success", "operation": key, "arguments": jsonable(kwargs), "result": _as_document(result)}
