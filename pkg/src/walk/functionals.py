"""Axis-segment functionals f(B_i).

A functional sees the sites of one axis segment one at a time and keeps only a small
accumulator, so a run of any length needs constant memory per functional.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Tuple

Site = Tuple[int, int]


@dataclass(frozen=True)
class Functional:
    """Incremental evaluator of a positive functional that is non-decreasing under extension.

    `feed(acc, site)` returns the accumulator after one more site; `value(acc)` reads it.
    `growth_constant` and `variance_exponent` document the (C1, delta) of the moment
    hypotheses the built-in satisfies; they are not checked at run time.
    """

    id: str
    description: str
    feed: Callable[[float, Site], float]
    initial: float = 0.0
    positive: bool = True
    non_decreasing: bool = True
    growth_constant: float = 1.0
    variance_exponent: float = 1.0

    def value(self, acc: float) -> float:
        return acc

    def evaluate(self, segment: Iterable[Site]) -> float:
        acc = self.initial
        for site in segment:
            acc = self.feed(acc, site)
        return self.value(acc)


def _count_axis(acc: float, site: Site) -> float:
    return acc + 1.0 if (site[0] == 0 or site[1] == 0) else acc


def _count_origin(acc: float, site: Site) -> float:
    return acc + 1.0 if (site[0] == 0 and site[1] == 0) else acc


AXIS_LOCAL_TIME = Functional(
    id="axis_local_time",
    description="number of segment sites on the axes (equals rho_i - eta_i)",
    feed=_count_axis,
)

ORIGIN_LOCAL_TIME = Functional(
    id="origin_local_time",
    description="number of segment visits to (0,0)",
    feed=_count_origin,
)

_BUILTINS: Dict[str, Functional] = {f.id: f for f in (AXIS_LOCAL_TIME, ORIGIN_LOCAL_TIME)}
BUILTIN_IDS = tuple(_BUILTINS)


def builtin_functionals() -> List[Functional]:
    return list(_BUILTINS.values())


def get_functionals(ids: Iterable[str]) -> List[Functional]:
    return [_BUILTINS[i] for i in ids]
