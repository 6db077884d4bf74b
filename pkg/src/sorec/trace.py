"""Temporal contact traces: parsing, validation, merging, splitting, synthesis.

Time is measured in integer slots. A contact ``[t_start, t_end)`` is active in
slots ``t_start .. t_end - 1`` and lasts ``t_end - t_start`` slots.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "TraceError",
    "TraceParseError",
    "TraceValidationError",
    "ContactRecord",
    "ObservationWindow",
    "TemporalTrace",
    "ContactTimeline",
    "SynthConfig",
    "parse_trace",
    "serialize_trace",
    "read_trace",
    "write_trace",
    "build_timelines",
    "merge_intervals",
    "split_window",
    "generate_synthetic",
]


class TraceError(ValueError):
    """Base class for trace ingestion problems."""


class TraceParseError(TraceError):
    """A line could not be parsed into four integer fields."""

    def __init__(self, problems: list[tuple[int, str]]):
        self.problems = problems
        lines = "; ".join(f"line {n}: {msg}" for n, msg in problems)
        super().__init__(f"malformed trace ({len(problems)} problem(s)): {lines}")


class TraceValidationError(TraceError):
    """A record or window violates an invariant."""


@dataclass(frozen=True, order=True)
class ContactRecord:
    """An undirected contact between two nodes over ``[t_start, t_end)``.

    The pair is stored in canonical order, so ``ContactRecord(2, 1, 0, 5)``
    has ``node_a == 1``.
    """

    node_a: int
    node_b: int
    t_start: int
    t_end: int

    def __post_init__(self):
        if self.node_a == self.node_b:
            raise TraceValidationError(f"self-contact on node {self.node_a}")
        if self.node_a < 0 or self.node_b < 0:
            raise TraceValidationError("node identifiers must be non-negative")
        if self.t_start < 0:
            raise TraceValidationError(f"negative start time {self.t_start}")
        if self.t_start >= self.t_end:
            raise TraceValidationError(
                f"t_start >= t_end ({self.t_start} >= {self.t_end})")
        if self.node_a > self.node_b:
            a, b = self.node_b, self.node_a
            object.__setattr__(self, "node_a", a)
            object.__setattr__(self, "node_b", b)

    @property
    def pair(self) -> tuple[int, int]:
        return (self.node_a, self.node_b)

    @property
    def duration(self) -> int:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class ObservationWindow:
    begin: int
    end: int

    def __post_init__(self):
        if self.begin >= self.end:
            raise TraceValidationError(
                f"empty observation window [{self.begin}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.begin

    def clip(self, record: ContactRecord) -> ContactRecord | None:
        """Clip ``record`` to the window, or ``None`` if it lies outside."""
        start = max(record.t_start, self.begin)
        end = min(record.t_end, self.end)
        if start >= end:
            return None
        if start == record.t_start and end == record.t_end:
            return record
        return ContactRecord(record.node_a, record.node_b, start, end)


@dataclass(frozen=True)
class TemporalTrace:
    """Node set, contact records and observation window.

    Records are clipped to the window and sorted on construction. Nodes that
    appear in records are added to ``nodes`` automatically, so isolated nodes
    only need to be listed explicitly.
    """

    records: tuple[ContactRecord, ...]
    window: ObservationWindow
    nodes: frozenset[int] = frozenset()

    def __post_init__(self):
        clipped = (self.window.clip(r) for r in self.records)
        records = tuple(sorted(r for r in clipped if r is not None))
        nodes = set(self.nodes)
        for r in records:
            nodes.add(r.node_a)
            nodes.add(r.node_b)
        if any(n < 0 for n in nodes):
            raise TraceValidationError("node identifiers must be non-negative")
        object.__setattr__(self, "records", records)
        object.__setattr__(self, "nodes", frozenset(nodes))

    @property
    def node_list(self) -> list[int]:
        return sorted(self.nodes)

    def __len__(self):
        return len(self.records)


@dataclass(frozen=True)
class ContactTimeline:
    """Merged encounters of one pair within a window.

    ``intervals`` are disjoint, non-abutting and sorted; the encounter
    durations are their lengths.
    """

    pair: tuple[int, int]
    intervals: tuple[tuple[int, int], ...]
    window: ObservationWindow

    def __post_init__(self):
        prev_end = None
        for start, end in self.intervals:
            if end <= start:
                raise TraceValidationError(f"non-positive encounter {start, end}")
            if start < self.window.begin or end > self.window.end:
                raise TraceValidationError("encounter outside window")
            if prev_end is not None and start <= prev_end:
                raise TraceValidationError("encounters must be disjoint and sorted")
            prev_end = end

    @property
    def durations(self) -> list[int]:
        return [end - start for start, end in self.intervals]

    @property
    def K(self) -> int:
        return len(self.intervals)

    @property
    def total_duration(self) -> int:
        return sum(end - start for start, end in self.intervals)


# --------------------------------------------------------------------------
# text format


def _parse_directive(body: str, directives: dict):
    key, sep, value = body.partition(":")
    if not sep:
        return
    key = key.strip().lower()
    if key == "window":
        parts = value.replace(",", " ").split()
        if len(parts) == 2:
            directives["window"] = (int(parts[0]), int(parts[1]))
    elif key == "nodes":
        directives["nodes"] = [int(x) for x in value.replace(",", " ").split()]


def parse_trace(text: str | Iterable[str],
                window: ObservationWindow | None = None,
                nodes: Iterable[int] = ()) -> TemporalTrace:
    """Parse ``node_a,node_b,t_start,t_end`` lines into a trace.

    Lines starting with ``#`` are comments. The comments ``# window: b e``
    and ``# nodes: ...`` written by :func:`serialize_trace` are honoured when
    ``window`` is not given; otherwise the window defaults to
    ``[0, max t_end)``. A non-numeric first data line is treated as a header.

    All malformed lines are collected and reported together.
    """
    lines = text.splitlines() if isinstance(text, str) else list(text)
    directives: dict = {}
    parsed: list[ContactRecord] = []
    problems: list[tuple[int, str]] = []
    invalid: list[tuple[int, str]] = []
    seen_data = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            try:
                _parse_directive(line[1:], directives)
            except ValueError:
                pass
            continue
        fields = [f.strip() for f in line.split(",")]
        if not seen_data:
            seen_data = True
            if len(fields) == 4 and not any(f.lstrip("-").isdigit() for f in fields):
                continue  # header
        if len(fields) != 4:
            problems.append((lineno, f"expected 4 fields, got {len(fields)}"))
            continue
        try:
            a, b, s, e = (int(f) for f in fields)
        except ValueError:
            problems.append((lineno, f"non-integer field in {line!r}"))
            continue
        try:
            parsed.append(ContactRecord(a, b, s, e))
        except TraceValidationError as exc:
            invalid.append((lineno, str(exc)))
    if problems:
        raise TraceParseError(problems + invalid)
    if invalid:
        raise TraceValidationError("; ".join(f"line {n}: {m}" for n, m in invalid))

    if window is None:
        if "window" in directives:
            window = ObservationWindow(*directives["window"])
        elif parsed:
            window = ObservationWindow(0, max(r.t_end for r in parsed))
        else:
            raise TraceValidationError("empty trace and no window given")
    node_set = set(nodes) | set(directives.get("nodes", ()))
    return TemporalTrace(tuple(parsed), window, frozenset(node_set))


def serialize_trace(trace: TemporalTrace, header: bool = False,
                    comments: Iterable[str] = ()) -> str:
    out = [f"# {c}" for c in comments]
    out.append(f"# window: {trace.window.begin} {trace.window.end}")
    out.append("# nodes: " + " ".join(str(n) for n in trace.node_list))
    if header:
        out.append("node_a,node_b,t_start,t_end")
    out.extend(f"{r.node_a},{r.node_b},{r.t_start},{r.t_end}" for r in trace.records)
    return "\n".join(out) + "\n"


def read_trace(path, window: ObservationWindow | None = None) -> TemporalTrace:
    return parse_trace(Path(path).read_text(), window)


def write_trace(trace: TemporalTrace, path, **kwargs) -> None:
    Path(path).write_text(serialize_trace(trace, **kwargs))


# --------------------------------------------------------------------------
# timelines


def merge_intervals(intervals: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    """Merge overlapping or abutting half-open intervals."""
    merged: list[list[int]] = []
    for start, end in sorted(intervals):
        if merged and start <= merged[-1][1]:
            if end > merged[-1][1]:
                merged[-1][1] = end
        else:
            merged.append([start, end])
    return [(s, e) for s, e in merged]


def build_timelines(trace: TemporalTrace) -> dict[tuple[int, int], ContactTimeline]:
    by_pair: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for r in trace.records:
        by_pair.setdefault(r.pair, []).append((r.t_start, r.t_end))
    return {
        pair: ContactTimeline(pair, tuple(merge_intervals(iv)), trace.window)
        for pair, iv in sorted(by_pair.items())
    }


def split_window(trace: TemporalTrace,
                 fraction: float) -> tuple[TemporalTrace, TemporalTrace]:
    """Cut the trace at ``begin + round(fraction * T)``.

    Records crossing the cut are split between both halves. Both halves keep
    the full node set.
    """
    if not 0.0 < fraction < 1.0:
        raise TraceValidationError(f"split fraction must lie in (0, 1), got {fraction}")
    w = trace.window
    t_split = w.begin + int(math.floor(fraction * w.length + 0.5))
    if t_split <= w.begin or t_split >= w.end:
        raise TraceValidationError(
            f"split at {t_split} leaves an empty window within [{w.begin}, {w.end})")
    first = ObservationWindow(w.begin, t_split)
    second = ObservationWindow(t_split, w.end)
    return (TemporalTrace(trace.records, first, trace.nodes),
            TemporalTrace(trace.records, second, trace.nodes))


# --------------------------------------------------------------------------
# synthetic traces


@dataclass(frozen=True)
class SynthConfig:
    """Planted-community contact generator settings.

    Nodes are split into ``communities`` contiguous blocks. The window is cut
    into epochs of ``epoch_length`` slots; in each epoch a pair starts one
    contact with probability equal to its rate, at a uniform offset, lasting
    a geometric number of slots with mean ``mean_duration``. Pairs inside a
    community use ``intra_rate``, other pairs ``inter_rate``; a pair that
    links a hub to a node outside the hub's community uses
    ``max(inter_rate, hub_rate)``.

    With ``activity_sigma > 0`` every node draws a lognormal activity factor
    (median 1) and each pair rate is scaled by the geometric mean of its two
    factors, clipped to 1. Hubs keep factor 1 so the planted contrast is
    controlled by ``hub_rate`` alone.
    """

    node_count: int = 100
    window_length: int = 10_000
    communities: int = 4
    hub_nodes: tuple[int, ...] = (0, 25, 50)
    intra_rate: float = 0.2
    inter_rate: float = 0.005
    hub_rate: float = 0.06
    epoch_length: int = 100
    mean_duration: float = 5.0
    activity_sigma: float = 0.5
    seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "hub_nodes", tuple(int(h) for h in self.hub_nodes))
        if self.node_count < 1:
            raise TraceValidationError("node_count must be at least 1")
        if self.window_length < 1:
            raise TraceValidationError("window_length must be at least 1")
        if not 1 <= self.communities <= self.node_count:
            raise TraceValidationError("communities must lie in [1, node_count]")
        for name in ("intra_rate", "inter_rate", "hub_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise TraceValidationError(f"{name} must lie in [0, 1], got {rate}")
        if self.epoch_length < 1:
            raise TraceValidationError("epoch_length must be at least 1")
        if self.mean_duration < 1.0:
            raise TraceValidationError("mean_duration must be at least 1 slot")
        if self.activity_sigma < 0:
            raise TraceValidationError("activity_sigma must be non-negative")
        if len(set(self.hub_nodes)) != len(self.hub_nodes):
            raise TraceValidationError("duplicate hub nodes")
        if any(not 0 <= h < self.node_count for h in self.hub_nodes):
            raise TraceValidationError("hub node outside [0, node_count)")

    def community_of(self, node: int) -> int:
        return node * self.communities // self.node_count

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hub_nodes"] = list(self.hub_nodes)
        return d

    @classmethod
    def from_dict(cls, data: Mapping) -> "SynthConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise TraceValidationError(f"unknown synth config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "SynthConfig":
        return cls.from_dict(json.loads(text))


def generate_synthetic(config: SynthConfig, seed: int | None = None) -> TemporalTrace:
    """Draw a planted-community trace; identical output for identical seeds."""
    rng = np.random.default_rng(config.seed if seed is None else seed)
    n = config.node_count
    window = ObservationWindow(0, config.window_length)
    nodes = frozenset(range(n))
    if n < 2:
        return TemporalTrace((), window, nodes)

    ii, jj = np.triu_indices(n, k=1)
    comm = np.arange(n) * config.communities // n
    same = comm[ii] == comm[jj]
    rates = np.where(same, config.intra_rate, config.inter_rate)
    hub = np.zeros(n, dtype=bool)
    hub[list(config.hub_nodes)] = True
    cross_hub = (hub[ii] | hub[jj]) & ~same
    rates = np.where(cross_hub, np.maximum(rates, config.hub_rate), rates)
    if config.activity_sigma > 0:
        activity = rng.lognormal(0.0, config.activity_sigma, size=n)
        activity[hub] = 1.0
        rates = np.minimum(rates * np.sqrt(activity[ii] * activity[jj]), 1.0)

    n_epochs = -(-config.window_length // config.epoch_length)
    hits = rng.random((ii.size, n_epochs)) < rates[:, None]
    pair_idx, epoch_idx = np.nonzero(hits)
    epoch_start = epoch_idx * config.epoch_length
    epoch_span = np.minimum(config.epoch_length, config.window_length - epoch_start)
    starts = epoch_start + (rng.random(pair_idx.size) * epoch_span).astype(np.int64)
    durations = rng.geometric(1.0 / config.mean_duration, size=pair_idx.size)
    ends = np.minimum(starts + durations, config.window_length)

    records = tuple(
        ContactRecord(int(a), int(b), int(s), int(e))
        for a, b, s, e in zip(ii[pair_idx], jj[pair_idx], starts, ends)
    )
    return TemporalTrace(records, window, nodes)
