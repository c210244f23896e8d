"""Streaming excursion engine.

The walk starts at (1,1) with rho_0 = 0. The i-th two-type excursion is the stretch
(rho_{i-1}, rho_i]: a cone part up to the entrance time eta_i into the axes K^c, then an
axis part up to the next entrance time rho_i into the cone K. Local times count the
times 0 <= k < n, so the axis local time is the sum of the completed axis durations
rho_i - eta_i plus the axis steps of the open segment.
"""
from __future__ import annotations

import copy
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from src.errors import PreconditionError, TruncationError
from src.logs import get_logger
from src.walk.functionals import Functional, builtin_functionals, get_functionals
from src.walk.lattice import START, WalkParams, on_cone_boundary, sample_move
from src.walk.rng import RandomSource

logger = get_logger(__name__)

MAX_SITE_NORM = 1_000_000
DURATION_BINS = 20
DEFAULT_BETA = 1.5
DEFAULT_THRESHOLD_EXPONENT = 0.55

Site = Tuple[int, int]


@dataclass(frozen=True)
class ExcursionRecord:
    index: int
    eta: int
    rho: int
    entry_site: Site
    exit_site: Site
    functional_values: Dict[str, float]


def index_block(i: int) -> int:
    """Excursion indices are grouped in blocks [2^b, 2^(b+1))."""
    return i.bit_length() - 1


@dataclass
class RunStats:
    """Aggregate of one trajectory (or of several merged replicas)."""

    n: int
    N_n: int = 0
    entries: int = 0
    functional_sums: Dict[str, float] = field(default_factory=dict)
    functional_tail: Dict[str, float] = field(default_factory=dict)
    local_time_axis: int = 0
    local_time_origin: int = 0
    entry_histogram: Counter = field(default_factory=Counter)
    exit_histogram: Counter = field(default_factory=Counter)
    sum_eta_minus_rho_prev: int = 0
    tail_cone_time: int = 0
    max_entry_norm: int = 0
    axis_duration_histogram: Counter = field(default_factory=Counter)
    entry_norm_blocks: Dict[int, Counter] = field(default_factory=dict)
    entries_above_threshold: int = 0
    threshold: float = 0.0
    replicas: int = 1

    @property
    def cone_time(self) -> int:
        return self.sum_eta_minus_rho_prev + self.tail_cone_time

    def functional_total(self, fid: str) -> float:
        """Sum over completed excursions plus the open segment, f(B*_n) included."""
        return self.functional_sums.get(fid, 0.0) + self.functional_tail.get(fid, 0.0)

    def entry_norm_moment(self, beta: float) -> float:
        counts = Counter()
        for block in self.entry_norm_blocks.values():
            counts.update(block)
        total = sum(counts.values())
        if total == 0:
            return 0.0
        return math.fsum(c * float(r) ** beta for r, c in counts.items()) / total

    def merge(self, other: "RunStats") -> "RunStats":
        """Component-wise sum; max_entry_norm by max. Exact, hence order-independent."""
        if other.n != self.n or other.threshold != self.threshold:
            raise PreconditionError("cannot merge runs with different horizons or thresholds")
        out = copy.deepcopy(self)
        out.N_n += other.N_n
        out.entries += other.entries
        for fid, v in other.functional_sums.items():
            out.functional_sums[fid] = out.functional_sums.get(fid, 0.0) + v
        for fid, v in other.functional_tail.items():
            out.functional_tail[fid] = out.functional_tail.get(fid, 0.0) + v
        out.local_time_axis += other.local_time_axis
        out.local_time_origin += other.local_time_origin
        out.entry_histogram.update(other.entry_histogram)
        out.exit_histogram.update(other.exit_histogram)
        out.sum_eta_minus_rho_prev += other.sum_eta_minus_rho_prev
        out.tail_cone_time += other.tail_cone_time
        out.max_entry_norm = max(out.max_entry_norm, other.max_entry_norm)
        out.axis_duration_histogram.update(other.axis_duration_histogram)
        for b, block in other.entry_norm_blocks.items():
            out.entry_norm_blocks.setdefault(b, Counter()).update(block)
        out.entries_above_threshold += other.entries_above_threshold
        out.replicas += other.replicas
        return out

    def to_dict(self) -> Dict[str, Any]:
        def hist(h):
            return [[int(k[0]), int(k[1]), int(v)] for k, v in sorted(h.items())]

        return {
            "n": self.n,
            "N_n": self.N_n,
            "entries": self.entries,
            "replicas": self.replicas,
            "functional_sums": {k: self.functional_sums[k] for k in sorted(self.functional_sums)},
            "functional_tail": {k: self.functional_tail[k] for k in sorted(self.functional_tail)},
            "local_time_axis": self.local_time_axis,
            "local_time_origin": self.local_time_origin,
            "sum_eta_minus_rho_prev": self.sum_eta_minus_rho_prev,
            "tail_cone_time": self.tail_cone_time,
            "max_entry_norm": self.max_entry_norm,
            "entries_above_threshold": self.entries_above_threshold,
            "threshold": self.threshold,
            "axis_duration_histogram": [[int(r), int(c)] for r, c in sorted(self.axis_duration_histogram.items())],
            "entry_norm_blocks": {
                str(b): [[int(r), int(c)] for r, c in sorted(block.items())]
                for b, block in sorted(self.entry_norm_blocks.items())
            },
            "entry_histogram": hist(self.entry_histogram),
            "exit_histogram": hist(self.exit_histogram),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunStats":
        return cls(
            n=data["n"],
            N_n=data["N_n"],
            entries=data["entries"],
            replicas=data.get("replicas", 1),
            functional_sums=dict(data["functional_sums"]),
            functional_tail=dict(data["functional_tail"]),
            local_time_axis=data["local_time_axis"],
            local_time_origin=data["local_time_origin"],
            sum_eta_minus_rho_prev=data["sum_eta_minus_rho_prev"],
            tail_cone_time=data["tail_cone_time"],
            max_entry_norm=data["max_entry_norm"],
            entries_above_threshold=data["entries_above_threshold"],
            threshold=data["threshold"],
            axis_duration_histogram=Counter({int(r): int(c) for r, c in data["axis_duration_histogram"]}),
            entry_norm_blocks={
                int(b): Counter({int(r): int(c) for r, c in rows}) for b, rows in data["entry_norm_blocks"].items()
            },
            entry_histogram=Counter({(a, b): c for a, b, c in data["entry_histogram"]}),
            exit_histogram=Counter({(a, b): c for a, b, c in data["exit_histogram"]}),
        )


class ExcursionEngine:
    """Resumable simulator of one trajectory.

    Only the current site, the open segment's accumulators and the aggregates are kept.
    """

    def __init__(
        self,
        params: WalkParams,
        seed: int,
        functionals: Optional[Sequence[Functional]] = None,
        stream: int = 0,
        threshold: float = 0.0,
        on_excursion: Optional[Callable[[ExcursionRecord], None]] = None,
    ):
        self.params = params
        self.functionals = list(functionals) if functionals is not None else builtin_functionals()
        self.rng = RandomSource(seed, stream)
        self.on_excursion = on_excursion
        self.k = 0
        self.x1, self.x2 = START
        self.on_axis = False
        self.eta = 0
        self.rho_prev = 0
        self._pending_cone = 0
        self.entry_site: Site = START
        self.accs = [f.initial for f in self.functionals]
        self.stats = RunStats(n=0, threshold=threshold)
        for f in self.functionals:
            self.stats.functional_sums[f.id] = 0.0
        self._outward: List[float] = [0.25]

    def _q(self, i: int) -> float:
        table = self._outward
        if i >= len(table):
            table.extend(self.params.outward(j) for j in range(len(table), 2 * i + 2))
        return table[i]

    def advance(self, n: int) -> RunStats:
        """Simulate until time n (absolute) and return the aggregate at n."""
        if n < self.k:
            raise PreconditionError(f"cannot rewind from time {self.k} to {n}")
        stats = self.stats
        funcs = self.functionals
        accs = self.accs
        x1, x2, k = self.x1, self.x2, self.k
        on_axis = self.on_axis
        q = self._q
        while k < n:
            draws = self.rng.take()
            left = n - k
            if len(draws) > left:
                self.rng.give_back(len(draws) - left)
                draws = draws[:left]
            for u in draws.tolist():
                if not on_axis:
                    if u < 0.5:
                        x1 += 1 if u < 0.25 else -1
                    else:
                        x2 += 1 if u < 0.75 else -1
                    k += 1
                    if x1 == 0 or x2 == 0:
                        on_axis = True
                        self._enter(k, x1, x2)
                    continue
                stats.local_time_axis += 1
                for j, f in enumerate(funcs):
                    accs[j] = f.feed(accs[j], (x1, x2))
                if x1 == 0 and x2 == 0:
                    stats.local_time_origin += 1
                    x1, x2 = sample_move(x1, x2, u, 0.25)
                else:
                    x1, x2 = sample_move(x1, x2, u, q(abs(x1) + abs(x2)))
                k += 1
                if x1 != 0 and x2 != 0:
                    on_axis = False
                    self._exit(k, x1, x2)
        self.x1, self.x2, self.k, self.on_axis = x1, x2, k, on_axis
        return self.snapshot()

    def _enter(self, k: int, x1: int, x2: int) -> None:
        stats = self.stats
        norm = max(abs(x1), abs(x2))
        if norm > MAX_SITE_NORM:
            raise TruncationError(f"entry site ({x1},{x2}) beyond max-norm {MAX_SITE_NORM}; check alpha")
        stats.entries += 1
        self.eta = k
        self.entry_site = (x1, x2)
        self._pending_cone = k - self.rho_prev
        stats.entry_histogram[(x1, x2)] += 1
        if norm > stats.max_entry_norm:
            stats.max_entry_norm = norm
        stats.entry_norm_blocks.setdefault(index_block(stats.entries), Counter())[norm] += 1
        if stats.threshold and norm > stats.threshold:
            stats.entries_above_threshold += 1
        self.accs[:] = [f.initial for f in self.functionals]

    def _exit(self, k: int, x1: int, x2: int) -> None:
        stats = self.stats
        site = (x1, x2)
        assert on_cone_boundary(site) and self.eta < k, (site, self.eta, k)
        stats.N_n += 1
        stats.exit_histogram[site] += 1
        stats.sum_eta_minus_rho_prev += self._pending_cone
        duration = k - self.eta
        stats.axis_duration_histogram[min(duration, DURATION_BINS + 1)] += 1
        values = {}
        for f, acc in zip(self.functionals, self.accs):
            v = f.value(acc)
            stats.functional_sums[f.id] += v
            values[f.id] = v
        if self.on_excursion is not None:
            self.on_excursion(ExcursionRecord(stats.N_n, self.eta, k, self.entry_site, site, values))
        self.rho_prev = k

    def snapshot(self) -> RunStats:
        """Aggregate at the current time, with the open segment folded in as the tail."""
        out = copy.deepcopy(self.stats)
        out.n = self.k
        if self.on_axis:
            out.functional_tail = {f.id: f.value(a) for f, a in zip(self.functionals, self.accs)}
            out.tail_cone_time = self.eta - self.rho_prev
        else:
            out.functional_tail = {f.id: 0.0 for f in self.functionals}
            out.tail_cone_time = self.k - self.rho_prev
        return out

    def save_state(self) -> Dict[str, Any]:
        return {
            "alpha": self.params.alpha,
            "functionals": [f.id for f in self.functionals],
            "rng": self.rng.snapshot(),
            "k": self.k,
            "site": [self.x1, self.x2],
            "on_axis": self.on_axis,
            "eta": self.eta,
            "rho_prev": self.rho_prev,
            "pending_cone": self._pending_cone,
            "entry_site": list(self.entry_site),
            "accs": list(self.accs),
            "stats": self.stats.to_dict(),
        }

    @classmethod
    def load_state(cls, state: Dict[str, Any], on_excursion=None) -> "ExcursionEngine":
        stats = RunStats.from_dict(state["stats"])
        engine = cls(
            WalkParams(alpha=state["alpha"]),
            state["rng"]["seed"],
            get_functionals(state["functionals"]),
            stream=state["rng"]["stream"],
            threshold=stats.threshold,
            on_excursion=on_excursion,
        )
        engine.rng = RandomSource.restore(state["rng"])
        engine.k = state["k"]
        engine.x1, engine.x2 = state["site"]
        engine.on_axis = state["on_axis"]
        engine.eta = state["eta"]
        engine.rho_prev = state["rho_prev"]
        engine._pending_cone = state["pending_cone"]
        engine.entry_site = tuple(state["entry_site"])
        engine.accs = list(state["accs"])
        engine.stats = stats
        return engine


def run_walk(
    params: WalkParams,
    n: int,
    seed: int,
    functionals: Optional[Iterable[Functional]] = None,
    stream: int = 0,
    threshold: Optional[float] = None,
    on_excursion: Optional[Callable[[ExcursionRecord], None]] = None,
) -> RunStats:
    """Simulate n steps from (1,1) and return the streaming aggregate.

    `threshold` is the entry-norm level counted by `entries_above_threshold`; it
    defaults to n^0.55.
    """
    if n < 1:
        raise PreconditionError(f"horizon must be >= 1, got {n}")
    if threshold is None:
        threshold = float(n) ** DEFAULT_THRESHOLD_EXPONENT
    engine = ExcursionEngine(
        params,
        seed,
        list(functionals) if functionals is not None else None,
        stream=stream,
        threshold=threshold,
        on_excursion=on_excursion,
    )
    stats = engine.advance(n)
    logger.debug("run alpha=%s n=%d stream=%d: N_n=%d", params.alpha, n, stream, stats.N_n)
    return stats


def theorem_estimates(stats: RunStats) -> Dict[str, float]:
    """(log n / n)-scaled estimators, plus the per-excursion averages sum f(B_i) / N_n (0 when N_n = 0)."""
    if stats.n < 2:
        raise PreconditionError("theorem estimates need n >= 2")
    scale = math.log(stats.n) / stats.n / stats.replicas
    out = {
        "axis_local_time": scale * stats.local_time_axis,
        "origin_local_time": scale * stats.local_time_origin,
        "excursion_rate": scale * stats.N_n,
    }
    for fid in sorted(stats.functional_sums):
        out[f"functional:{fid}"] = scale * stats.functional_total(fid)
        out[f"per_excursion:{fid}"] = stats.functional_sums[fid] / stats.N_n if stats.N_n > 0 else 0.0
    return out
