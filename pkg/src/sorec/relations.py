"""Direct and indirect social relations between nodes of a contact trace.

The direct relation of a pair with encounter durations ``theta_1..theta_K``
inside a window of ``T`` slots is

    srs = (2 / pi) * sum_k sin(pi * theta_k / (2 T))

The indirect relation combines every simple bridging path ``i, q_1, .., q_S, j``
(``S >= 1``) as a noisy-or of the path products of direct relations.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .trace import ContactTimeline, TemporalTrace, build_timelines

__all__ = [
    "RelationError",
    "ReferenceMetrics",
    "SRSMatrix",
    "IndirectPath",
    "InfluenceSphere",
    "srs",
    "reference_metrics",
    "srs_matrix",
    "enumerate_indirect_paths",
    "path_influence",
    "in_srs",
    "in_srs_matrix",
    "influence_sphere",
    "influence_spheres",
    "write_srs_csv",
    "spheres_to_json",
]

# bounds checks allow this much floating point slack above 1
BOUND_SLACK = 1e-12
# largest node count for the n**3-memory vectorized path
DENSE_LIMIT = 200


class RelationError(ValueError):
    pass


def _durations(timeline) -> Sequence[float]:
    if isinstance(timeline, ContactTimeline):
        return timeline.durations
    return list(timeline)


def srs(timeline: ContactTimeline | Sequence[float], window_length: float) -> float:
    """Social-relation stability of one pair.

    ``timeline`` is a :class:`ContactTimeline` or a plain sequence of
    encounter durations. Raises :class:`RelationError` when a duration is not
    in ``(0, T]`` or the durations sum past ``T``.
    """
    T = float(window_length)
    if T <= 0:
        raise RelationError(f"window length must be positive, got {window_length}")
    durations = _durations(timeline)
    total = 0.0
    acc = 0.0
    for theta in durations:
        if not 0 < theta <= T:
            raise RelationError(f"encounter duration {theta} outside (0, {T}]")
        total += theta
        acc += math.sin(math.pi * theta / (2.0 * T))
    if total > T * (1 + BOUND_SLACK):
        raise RelationError(f"total contact time {total} exceeds window {T}")
    return acc / (math.pi / 2.0)


@dataclass(frozen=True)
class ReferenceMetrics:
    ef: int
    tcd: int
    asp: float


def reference_metrics(timeline: ContactTimeline) -> ReferenceMetrics:
    """Encounter frequency, total contact duration, average separation period.

    Separation periods are the maximal contact-free stretches of the
    timeline's window, including any before the first or after the last
    encounter. With no encounters the whole window is one separation.
    """
    w = timeline.window
    gaps = []
    cursor = w.begin
    for start, end in timeline.intervals:
        if start > cursor:
            gaps.append(start - cursor)
        cursor = end
    if w.end > cursor:
        gaps.append(w.end - cursor)
    asp = sum(gaps) / len(gaps) if gaps else 0.0
    return ReferenceMetrics(ef=timeline.K, tcd=timeline.total_duration, asp=float(asp))


@dataclass(frozen=True, eq=False)
class SRSMatrix:
    """Dense symmetric matrix of direct relations, indexed by sorted node id."""

    nodes: tuple[int, ...]
    values: np.ndarray
    window_length: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        n = len(self.nodes)
        if values.shape != (n, n):
            raise RelationError(f"values shape {values.shape} does not match {n} nodes")
        if not np.array_equal(values, values.T):
            raise RelationError("SRS matrix must be symmetric")
        if np.any(values < 0) or np.any(values > 1 + BOUND_SLACK):
            raise RelationError("SRS values must lie in [0, 1]")
        values = values.copy()
        np.fill_diagonal(values, 0.0)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_index", {v: k for k, v in enumerate(self.nodes)})

    @property
    def n(self) -> int:
        return len(self.nodes)

    def index(self, node: int) -> int:
        try:
            return self._index[node]
        except KeyError:
            raise RelationError(f"unknown node {node}") from None

    def get(self, a: int, b: int) -> float:
        return float(self.values[self.index(a), self.index(b)])

    def nonzero_pairs(self):
        """Yield ``(a, b, value)`` for ``a < b`` with nonzero value."""
        ii, jj = np.nonzero(np.triu(self.values, k=1))
        for i, j in zip(ii, jj):
            yield self.nodes[i], self.nodes[j], float(self.values[i, j])

    @classmethod
    def from_pairs(cls, pairs: Mapping[tuple[int, int], float],
                   nodes=None, window_length: int = 1) -> "SRSMatrix":
        """Build from a ``{(a, b): value}`` map (handy for tests)."""
        node_set = set(nodes or ())
        for a, b in pairs:
            node_set.update((a, b))
        node_tuple = tuple(sorted(node_set))
        index = {v: k for k, v in enumerate(node_tuple)}
        values = np.zeros((len(node_tuple), len(node_tuple)))
        for (a, b), v in pairs.items():
            values[index[a], index[b]] = values[index[b], index[a]] = v
        return cls(node_tuple, values, window_length)


def srs_matrix(trace: TemporalTrace) -> SRSMatrix:
    T = trace.window.length
    nodes = tuple(trace.node_list)
    index = {v: k for k, v in enumerate(nodes)}
    values = np.zeros((len(nodes), len(nodes)))
    for (a, b), timeline in build_timelines(trace).items():
        v = srs(timeline, T)
        values[index[a], index[b]] = values[index[b], index[a]] = v
    return SRSMatrix(nodes, values, T)


# --------------------------------------------------------------------------
# indirect relations


@dataclass(frozen=True, order=True)
class IndirectPath:
    endpoints: tuple[int, int]
    intermediates: tuple[int, ...]

    def __post_init__(self):
        if not self.intermediates:
            raise RelationError("an indirect path needs at least one intermediate")
        seq = self.nodes
        if len(set(seq)) != len(seq):
            raise RelationError(f"path {seq} is not simple")

    @property
    def nodes(self) -> tuple[int, ...]:
        return (self.endpoints[0], *self.intermediates, self.endpoints[1])

    def hops(self):
        seq = self.nodes
        return zip(seq[:-1], seq[1:])


def _adjacency(matrix: SRSMatrix, epsilon: float) -> list[list[int]]:
    vals = matrix.values
    return [np.flatnonzero(vals[k] > epsilon).tolist() for k in range(matrix.n)]


def enumerate_indirect_paths(matrix: SRSMatrix, i: int, j: int,
                             max_intermediates: int = 2,
                             epsilon: float = 0.0) -> list[IndirectPath]:
    """All simple ``i -> j`` paths with 1..max_intermediates intermediates.

    A hop is usable when its direct relation exceeds ``epsilon``. Paths are
    returned sorted by their intermediate sequence.
    """
    if i == j:
        raise RelationError("endpoints must differ")
    if max_intermediates < 1:
        raise RelationError("max_intermediates must be at least 1")
    src, dst = matrix.index(i), matrix.index(j)
    adj = _adjacency(matrix, epsilon)
    nodes = matrix.nodes
    found: list[IndirectPath] = []
    stack: list[int] = []
    on_path = {src, dst}

    def extend(u: int):
        for v in adj[u]:
            if v == dst and stack:
                found.append(IndirectPath((i, j), tuple(nodes[q] for q in stack)))
            elif v not in on_path and len(stack) < max_intermediates:
                stack.append(v)
                on_path.add(v)
                extend(v)
                on_path.discard(v)
                stack.pop()

    extend(src)
    found.sort()
    return found


def path_influence(path: IndirectPath, matrix: SRSMatrix) -> float:
    """Product of the direct relations along every hop of ``path``."""
    prod = 1.0
    for a, b in path.hops():
        v = matrix.get(a, b)
        if v == 0.0:
            raise RelationError(f"hop {a}-{b} has no direct relation")
        prod *= v
    return prod


def in_srs(matrix: SRSMatrix, i: int, j: int, max_intermediates: int = 2,
           epsilon: float = 0.0) -> float:
    """Noisy-or of path influences over all indirect ``i -> j`` paths.

    The direct edge is never counted, even when ``i`` and ``j`` are adjacent.
    """
    miss = 1.0
    for path in enumerate_indirect_paths(matrix, i, j, max_intermediates, epsilon):
        miss *= 1.0 - path_influence(path, matrix)
    return 1.0 - miss


def _log_miss_dfs(matrix: SRSMatrix, max_intermediates: int, epsilon: float) -> np.ndarray:
    # acc[s, t] = sum over indirect s->t paths of log(1 - PI)
    vals = matrix.values
    adj = _adjacency(matrix, epsilon)
    n = matrix.n
    acc = np.zeros((n, n))
    max_hops = max_intermediates + 1
    for s in range(n):
        row = acc[s]
        on_path = [False] * n
        on_path[s] = True

        def walk(u: int, prod: float, hops: int):
            for v in adj[u]:
                if on_path[v]:
                    continue
                p = prod * vals[u, v]
                if hops >= 1:
                    row[v] += math.log1p(-p) if p < 1.0 else -math.inf
                if hops + 1 < max_hops:
                    on_path[v] = True
                    walk(v, p, hops + 1)
                    on_path[v] = False

        walk(s, 1.0, 0)
    return acc


def _log_miss_dense(matrix: SRSMatrix, max_intermediates: int, epsilon: float) -> np.ndarray:
    a = np.where(matrix.values > epsilon, matrix.values, 0.0)
    n = matrix.n
    with np.errstate(divide="ignore"):
        # one intermediate: i - q - j, q is distinct from i, j by the zero diagonal
        two_hop = a[:, :, None] * a[None, :, :]  # [i, q, j]
        acc = np.log1p(-two_hop).sum(axis=1)
        if max_intermediates >= 2:
            q1_is_j = np.broadcast_to(np.eye(n, dtype=bool)[:, None, :], (n, n, n))
            for i in range(n):
                # i - q1 - q2 - j; exclude q1 == j and q2 == i
                p = a[i][:, None, None] * a[:, :, None] * a[None, :, :]  # [q1, q2, j]
                p[:, i, :] = 0.0
                p[q1_is_j] = 0.0
                acc[i] += np.log1p(-p).sum(axis=(0, 1))
    return acc


def in_srs_matrix(matrix: SRSMatrix, max_intermediates: int = 2,
                  epsilon: float = 0.0) -> np.ndarray:
    """Indirect relations for every pair, aligned with ``matrix.nodes``.

    Uses dense array arithmetic for up to two intermediates and a depth-first
    walk from every source otherwise. The result is exactly symmetric.
    """
    if max_intermediates < 1:
        raise RelationError("max_intermediates must be at least 1")
    if max_intermediates <= 2 and matrix.n <= DENSE_LIMIT:
        log_miss = _log_miss_dense(matrix, max_intermediates, epsilon)
    else:
        log_miss = _log_miss_dfs(matrix, max_intermediates, epsilon)
    upper = np.triu(-np.expm1(log_miss), k=1)
    out = upper + upper.T
    return np.clip(out, 0.0, 1.0)


# --------------------------------------------------------------------------
# influence spheres


@dataclass(frozen=True)
class InfluenceSphere:
    owner: int
    strengths: Mapping[int, float]

    def __post_init__(self):
        if self.owner in self.strengths:
            raise RelationError("a node is not its own friend")
        for friend, w in self.strengths.items():
            if not 0.0 < w <= 1.0 + BOUND_SLACK:
                raise RelationError(f"strength {w} for friend {friend} outside (0, 1]")

    @property
    def friends(self) -> frozenset[int]:
        return frozenset(self.strengths)

    @property
    def total_weight(self) -> float:
        return math.fsum(self.strengths.values())

    def __len__(self):
        return len(self.strengths)


def _combine(direct: float, indirect: float) -> float:
    return 1.0 - (1.0 - direct) * (1.0 - indirect)


def influence_sphere(matrix: SRSMatrix, in_srs_values: np.ndarray, i: int) -> InfluenceSphere:
    """Friends of ``i`` (nonzero direct or indirect relation) and their strengths."""
    k = matrix.index(i)
    direct = matrix.values[k]
    indirect = np.asarray(in_srs_values)[k]
    strengths = {}
    for m in np.flatnonzero((direct != 0) | (indirect != 0)):
        if m == k:
            continue
        strengths[matrix.nodes[m]] = _combine(float(direct[m]), float(indirect[m]))
    return InfluenceSphere(i, strengths)


def influence_spheres(matrix: SRSMatrix, in_srs_values: np.ndarray) -> dict[int, InfluenceSphere]:
    return {v: influence_sphere(matrix, in_srs_values, v) for v in matrix.nodes}


def write_srs_csv(matrix: SRSMatrix, path, comments: Sequence[str] = ()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append("node_a,node_b,srs")
    lines.extend(f"{a},{b},{v!r}" for a, b, v in matrix.nonzero_pairs())
    Path(path).write_text("\n".join(lines) + "\n")


def spheres_to_json(spheres: Mapping[int, InfluenceSphere]) -> str:
    data = {
        str(owner): {str(f): w for f, w in sorted(s.strengths.items())}
        for owner, s in sorted(spheres.items())
    }
    return json.dumps(data, indent=1, sort_keys=False)
