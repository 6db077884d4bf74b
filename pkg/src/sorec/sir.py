"""Monte Carlo SIR spreading over a temporal contact trace.

Slot-level model
----------------
Every node starts susceptible except the seed, which is infected from the
first slot of the window. During slot ``t`` each contact between an infected
node and a susceptible node is an independent Bernoulli(``infection_prob``)
attempt, one per infected neighbour per slot. A node infected during slot
``t`` enters the infected state at ``t + 1`` and transmits from then on.
Recovery is applied at the end of every slot a node spends infected: with
probability ``recovery_prob`` (geometric), or after exactly
``recovery_period`` infected slots (fixed). Recovered nodes are immune.

The simulator below does not step slot by slot. It computes each node's
infection time as the earliest successful attempt over the infectious
periods of already infected neighbours, in the manner of Dijkstra's
algorithm. Because attempts are independent, the first success on a run of
``m`` consecutive attempts is a truncated geometric draw, which gives the same
joint distribution of infection and recovery times as the slot stepper.
"""
from __future__ import annotations

import bisect
import heapq
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .trace import TemporalTrace, build_timelines

__all__ = [
    "SIRConfig",
    "SIRRun",
    "SIROutcome",
    "ContactIndex",
    "run_sir",
    "monte_carlo_influence",
    "write_outcomes_csv",
]


@dataclass(frozen=True)
class SIRConfig:
    infection_prob: float = 0.1
    recovery: str = "geometric"
    recovery_prob: float = 0.02
    recovery_period: int | None = None
    runs: int = 500
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.infection_prob <= 1.0:
            raise ValueError(f"infection_prob must lie in [0, 1], got {self.infection_prob}")
        if self.recovery == "geometric":
            if not 0.0 <= self.recovery_prob <= 1.0:
                raise ValueError(f"recovery_prob must lie in [0, 1], got {self.recovery_prob}")
        elif self.recovery == "fixed":
            if self.recovery_period is None or self.recovery_period < 1:
                raise ValueError("fixed recovery needs recovery_period >= 1")
        else:
            raise ValueError(f"recovery must be 'geometric' or 'fixed', got {self.recovery!r}")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")

    def describe(self) -> dict:
        d = {"infection_prob": self.infection_prob, "recovery": self.recovery,
             "runs": self.runs, "rng_seed": self.rng_seed}
        if self.recovery == "geometric":
            d["recovery_prob"] = self.recovery_prob
        else:
            d["recovery_period"] = self.recovery_period
        return d


@dataclass(frozen=True)
class SIRRun:
    """One realisation. Times are slots from the window start.

    ``recovery_times`` holds the first recovered slot, which may lie past the
    window end.
    """

    seed_node: int
    run_index: int
    infection_times: dict[int, int]
    recovery_times: dict[int, float]

    @property
    def influence_range(self) -> int:
        return len(self.infection_times)

    @property
    def influence_speed(self) -> float:
        return math.fsum(self.infection_times.values()) / len(self.infection_times)

    def state_counts(self, n_nodes: int, window_length: int) -> np.ndarray:
        """``(window_length + 1, 3)`` susceptible/infected/recovered counts.

        Row ``t`` is the state at the start of slot ``t``; the last row is
        the state at the window end.
        """
        t = np.arange(window_length + 1)
        inf = np.array(list(self.infection_times.values()))
        rec = np.array([self.recovery_times[v] for v in self.infection_times])
        infected_by = (inf[None, :] <= t[:, None])
        recovered_by = (rec[None, :] <= t[:, None])
        r = recovered_by.sum(axis=1)
        i = infected_by.sum(axis=1) - r
        return np.stack([n_nodes - i - r, i, r], axis=1)


@dataclass(frozen=True)
class SIROutcome:
    seed_node: int
    influence_range: float
    influence_speed: float
    runs: int
    per_run: tuple[tuple[int, float], ...] | None = None


class ContactIndex:
    """Per-node merged contact intervals, sorted by start, for fast lookup."""

    def __init__(self, trace: TemporalTrace):
        self.window = trace.window
        self.nodes = frozenset(trace.nodes)
        rows: dict[int, list[tuple[int, int, int]]] = {v: [] for v in trace.nodes}
        for (a, b), tl in build_timelines(trace).items():
            for s, e in tl.intervals:
                rows[a].append((s, e, b))
                rows[b].append((s, e, a))
        self.intervals: dict[int, list[tuple[int, int, int]]] = {}
        self.starts: dict[int, list[int]] = {}
        self.longest: dict[int, int] = {}
        for v, iv in rows.items():
            iv.sort()
            self.intervals[v] = iv
            self.starts[v] = [s for s, _, _ in iv]
            self.longest[v] = max((e - s for s, e, _ in iv), default=0)


class _Uniforms:
    """Buffered uniform draws from a per-run generator."""

    __slots__ = ("_rng", "_buf", "_pos")

    def __init__(self, rng: np.random.Generator):
        self._rng = rng
        self._buf = rng.random(32).tolist()
        self._pos = 0

    def next(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._rng.random(256).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return 1.0 - u  # in (0, 1]


def _geometric(u: float, log_q: float) -> float:
    """Trials until first success, from a uniform in (0, 1]; ``log_q = log(1 - p)``."""
    if log_q == -math.inf:
        return 1
    if log_q == 0.0:
        return math.inf
    return math.floor(math.log(u) / log_q) + 1


def _run_rng(rng_seed: int, seed_node: int, run_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=rng_seed, spawn_key=(seed_node, run_index))
    return np.random.Generator(np.random.PCG64(ss))


def _log1m(p: float) -> float:
    return -math.inf if p >= 1.0 else math.log1p(-p)


def _simulate(index: ContactIndex, seed_node: int, config: SIRConfig,
              run_index: int) -> SIRRun:
    begin, end = index.window.begin, index.window.end
    draws = _Uniforms(_run_rng(config.rng_seed, seed_node, run_index))
    log_q_inf = _log1m(config.infection_prob)
    fixed = config.recovery == "fixed"
    log_q_rec = 0.0 if fixed else _log1m(config.recovery_prob)

    infected: dict[int, int] = {}
    recovered: dict[int, float] = {}
    best: dict[int, int] = {seed_node: begin}
    heap = [(begin, seed_node)]
    while heap:
        t_u, u = heapq.heappop(heap)
        if u in infected:
            continue
        infected[u] = t_u
        period = config.recovery_period if fixed else _geometric(draws.next(), log_q_rec)
        t_rec = t_u + period
        recovered[u] = t_rec
        if config.infection_prob <= 0.0:
            continue
        stop = min(t_rec, end)
        ivs = index.intervals[u]
        lo = bisect.bisect_left(index.starts[u], t_u - index.longest[u])
        hi = bisect.bisect_left(index.starts[u], stop)
        for s, e, v in ivs[lo:hi]:
            if v in infected:
                continue
            a = s if s > t_u else t_u
            b = e if e < stop else stop
            if a >= b or best.get(v, math.inf) <= a + 1:
                continue
            g = _geometric(draws.next(), log_q_inf)
            if g <= b - a:
                t_v = a + g  # success in slot a + g - 1
                if t_v < best.get(v, math.inf):
                    best[v] = t_v
                    heapq.heappush(heap, (t_v, v))

    return SIRRun(
        seed_node, run_index,
        {v: t - begin for v, t in infected.items()},
        {v: t - begin for v, t in recovered.items()},
    )


def run_sir(trace: TemporalTrace | ContactIndex, seed_node: int, config: SIRConfig,
            run_index: int = 0) -> SIRRun:
    """One spreading realisation from ``seed_node``.

    Deterministic in ``(config.rng_seed, seed_node, run_index)``.
    """
    index = trace if isinstance(trace, ContactIndex) else ContactIndex(trace)
    if seed_node not in index.nodes:
        raise KeyError(f"seed node {seed_node} is not in the trace")
    return _simulate(index, seed_node, config, run_index)


def _outcome(index: ContactIndex, seed_node: int, config: SIRConfig,
             keep_runs: bool) -> SIROutcome:
    ranges = []
    speeds = []
    for k in range(config.runs):
        run = _simulate(index, seed_node, config, k)
        ranges.append(run.influence_range)
        speeds.append(run.influence_speed)
    per_run = tuple(zip(ranges, speeds)) if keep_runs else None
    return SIROutcome(seed_node, math.fsum(ranges) / config.runs,
                      math.fsum(speeds) / config.runs, config.runs, per_run)


def _outcome_batch(args) -> list[SIROutcome]:
    trace, seeds, config, keep_runs = args
    index = ContactIndex(trace)
    return [_outcome(index, s, config, keep_runs) for s in seeds]


def monte_carlo_influence(trace: TemporalTrace, config: SIRConfig,
                          seeds: Iterable[int] | None = None, workers: int = 1,
                          keep_runs: bool = False) -> dict[int, SIROutcome]:
    """Mean influence range and speed for every seed node.

    Results do not depend on ``workers``: each run draws from its own
    generator keyed by ``(rng_seed, seed_node, run_index)``.
    """
    seed_list = sorted(trace.nodes if seeds is None else seeds)
    missing = set(seed_list) - set(trace.nodes)
    if missing:
        raise KeyError(f"seed nodes not in trace: {sorted(missing)}")
    if workers <= 1 or len(seed_list) < 2:
        index = ContactIndex(trace)
        return {s: _outcome(index, s, config, keep_runs) for s in seed_list}
    chunks = [seed_list[k::workers] for k in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = pool.map(_outcome_batch,
                           [(trace, c, config, keep_runs) for c in chunks if c])
        merged = {o.seed_node: o for batch in results for o in batch}
    return {s: merged[s] for s in seed_list}


def write_outcomes_csv(outcomes: dict[int, SIROutcome], path,
                       comments: Sequence[str] = (), per_run_path=None) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append("node,mean_range,mean_speed,runs")
    lines.extend(f"{o.seed_node},{o.influence_range!r},{o.influence_speed!r},{o.runs}"
                 for o in outcomes.values())
    Path(path).write_text("\n".join(lines) + "\n")
    if per_run_path is not None:
        rows = ["node,run,range,speed"]
        for o in outcomes.values():
            if o.per_run is None:
                continue
            rows.extend(f"{o.seed_node},{k},{r},{s!r}" for k, (r, s) in enumerate(o.per_run))
        Path(per_run_path).write_text("\n".join(rows) + "\n")
