"""SoReC scores, static baseline centralities and tie-aware rankings."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np
from scipy.stats import rankdata

from .relations import (
    InfluenceSphere,
    SRSMatrix,
    in_srs_matrix,
    influence_spheres,
    srs_matrix,
)
from .trace import TemporalTrace, build_timelines

__all__ = [
    "MEASURES",
    "BASELINES",
    "EmptySphereError",
    "ScoreTable",
    "RankEntry",
    "RankingList",
    "SoRecConfig",
    "SoRecResult",
    "influence_probabilities",
    "influence_entropy",
    "sorec",
    "compute_sorec",
    "aggregate_graph",
    "baseline_centrality",
    "contact_scores",
    "compute_scores",
    "rank_nodes",
    "write_scores_csv",
    "scores_bundle_json",
]

BASELINES = ("degree", "betweenness", "closeness", "pagerank")
MEASURES = ("sorec",) + BASELINES + ("ef", "tcd")


class EmptySphereError(ValueError):
    """Influence probabilities are undefined for a sphere without weight."""


@dataclass(frozen=True)
class ScoreTable:
    measure: str
    scores: Mapping[int, float]

    def __post_init__(self):
        for node, s in self.scores.items():
            if not math.isfinite(s):
                raise ValueError(f"non-finite {self.measure} score for node {node}")

    @property
    def nodes(self) -> list[int]:
        return sorted(self.scores)


@dataclass(frozen=True)
class RankEntry:
    node: int
    score: float
    rank: float


@dataclass(frozen=True)
class RankingList:
    """Nodes by descending score; tied scores share their average rank."""

    measure: str
    entries: tuple[RankEntry, ...]

    @property
    def nodes(self) -> list[int]:
        return [e.node for e in self.entries]

    def ranks(self) -> dict[int, float]:
        return {e.node: e.rank for e in self.entries}

    def __len__(self):
        return len(self.entries)


# --------------------------------------------------------------------------
# SoReC


def influence_probabilities(sphere: InfluenceSphere) -> dict[int, float]:
    total = sphere.total_weight
    if not sphere.strengths or total <= 0.0:
        raise EmptySphereError(f"node {sphere.owner} has no weighted friends")
    return {f: w / total for f, w in sphere.strengths.items()}


def influence_entropy(probabilities: Mapping[int, float] | Iterable[float]) -> float:
    """Shannon entropy in bits; zero-probability terms contribute nothing."""
    values = probabilities.values() if isinstance(probabilities, Mapping) else probabilities
    h = -math.fsum(p * math.log2(p) for p in values if p > 0.0)
    return h if h > 0.0 else 0.0


def sorec(sphere: InfluenceSphere) -> float:
    """Influence entropy times total influence strength.

    Empty spheres score 0. A single-friend sphere also scores 0 because its
    entropy vanishes, however strong the tie.
    """
    try:
        probs = influence_probabilities(sphere)
    except EmptySphereError:
        return 0.0
    return influence_entropy(probs) * sphere.total_weight


@dataclass(frozen=True)
class SoRecConfig:
    max_intermediates: int = 2
    epsilon: float = 0.0

    def __post_init__(self):
        if self.max_intermediates < 1:
            raise ValueError("max_intermediates must be at least 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")


@dataclass(frozen=True, eq=False)
class SoRecResult:
    srs: SRSMatrix
    in_srs: np.ndarray
    spheres: dict[int, InfluenceSphere]
    scores: ScoreTable


def compute_sorec(trace: TemporalTrace, config: SoRecConfig = SoRecConfig()) -> SoRecResult:
    matrix = srs_matrix(trace)
    indirect = in_srs_matrix(matrix, config.max_intermediates, config.epsilon)
    spheres = influence_spheres(matrix, indirect)
    scores = ScoreTable("sorec", {v: sorec(s) for v, s in spheres.items()})
    return SoRecResult(matrix, indirect, spheres, scores)


# --------------------------------------------------------------------------
# baselines


def aggregate_graph(trace: TemporalTrace) -> nx.Graph:
    """Static unweighted graph: an edge for every pair that ever met."""
    g = nx.Graph()
    g.add_nodes_from(trace.node_list)
    g.add_edges_from(r.pair for r in trace.records)
    return g


def _pagerank(graph: nx.Graph, damping: float = 0.85, tol: float = 1e-10,
              max_iter: int = 10_000) -> dict[int, float]:
    nodes = sorted(graph.nodes)
    n = len(nodes)
    if n == 0:
        return {}
    a = nx.to_numpy_array(graph, nodelist=nodes, weight=None)
    out_deg = a.sum(axis=1)
    dangling = out_deg == 0
    # row-normalised transition matrix; dangling rows handled separately
    m = np.divide(a, out_deg[:, None], out=np.zeros_like(a), where=~dangling[:, None])
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        new = damping * (x @ m + x[dangling].sum() / n) + (1.0 - damping) / n
        residual = np.abs(new - x).sum()
        x = new
        if residual < tol:
            break
    else:
        raise RuntimeError("pagerank power iteration did not converge")
    return {v: float(s) for v, s in zip(nodes, x)}


def baseline_centrality(graph: nx.Graph, measure: str) -> ScoreTable:
    """Static centrality on the aggregated graph.

    ``closeness`` is the harmonic form (sum of inverse distances) so that
    disconnected graphs are handled; ``betweenness`` is unnormalised and
    counts each unordered pair once.
    """
    if measure == "degree":
        scores = {v: float(d) for v, d in graph.degree()}
    elif measure == "betweenness":
        scores = nx.betweenness_centrality(graph, normalized=False)
    elif measure == "closeness":
        scores = nx.harmonic_centrality(graph)
    elif measure == "pagerank":
        scores = _pagerank(graph)
    else:
        raise ValueError(f"unknown baseline measure {measure!r}; choose from {BASELINES}")
    return ScoreTable(measure, {int(v): float(s) for v, s in sorted(scores.items())})


def contact_scores(trace: TemporalTrace, measure: str) -> ScoreTable:
    """Per-node encounter count (``ef``) or total contact time (``tcd``)."""
    if measure not in ("ef", "tcd"):
        raise ValueError(f"unknown contact measure {measure!r}")
    scores = {v: 0.0 for v in trace.node_list}
    for (a, b), tl in build_timelines(trace).items():
        value = tl.K if measure == "ef" else tl.total_duration
        scores[a] += value
        scores[b] += value
    return ScoreTable(measure, scores)


def compute_scores(trace: TemporalTrace, measures: Sequence[str] = MEASURES,
                   config: SoRecConfig = SoRecConfig()) -> dict[str, ScoreTable]:
    unknown = set(measures) - set(MEASURES)
    if unknown:
        raise ValueError(f"unknown measures {sorted(unknown)}; choose from {MEASURES}")
    out: dict[str, ScoreTable] = {}
    graph = None
    for m in measures:
        if m == "sorec":
            out[m] = compute_sorec(trace, config).scores
        elif m in BASELINES:
            if graph is None:
                graph = aggregate_graph(trace)
            out[m] = baseline_centrality(graph, m)
        else:
            out[m] = contact_scores(trace, m)
    return out


# --------------------------------------------------------------------------
# ranking


def rank_nodes(table: ScoreTable, ascending: bool = False) -> RankingList:
    """Rank 1 goes to the highest score (lowest with ``ascending``)."""
    sign = 1.0 if ascending else -1.0
    ordered = sorted(table.scores.items(), key=lambda kv: (sign * kv[1], kv[0]))
    if not ordered:
        return RankingList(table.measure, ())
    keys = np.array([sign * s for _, s in ordered])
    ranks = rankdata(keys, method="average")
    entries = tuple(RankEntry(v, float(s), float(r))
                    for (v, s), r in zip(ordered, ranks))
    return RankingList(table.measure, entries)


def write_scores_csv(ranking: RankingList, path, comments: Sequence[str] = ()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append("node,score,rank")
    lines.extend(f"{e.node},{e.score!r},{e.rank!r}" for e in ranking.entries)
    Path(path).write_text("\n".join(lines) + "\n")


def scores_bundle_json(tables: Mapping[str, ScoreTable], config: Mapping | None = None) -> str:
    bundle: dict = {}
    if config is not None:
        bundle["config"] = dict(config)
    bundle["measures"] = {}
    for name, table in tables.items():
        ranking = rank_nodes(table)
        bundle["measures"][name] = [
            {"node": e.node, "score": e.score, "rank": e.rank} for e in ranking.entries
        ]
    return json.dumps(bundle, indent=1)
