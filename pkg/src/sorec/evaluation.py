"""Compare predicted rankings with simulated ground truth.

The training part of a trace feeds the centrality measures; SIR spreading on
the held-out part gives each node's actual influence range and speed. Each
measure is scored by the Pearson correlation of rank vectors and by top-L
average-influence curves.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .centrality import (
    MEASURES,
    RankingList,
    ScoreTable,
    SoRecConfig,
    compute_scores,
    rank_nodes,
)
from .sir import SIRConfig, SIROutcome, monte_carlo_influence
from .trace import ObservationWindow, TemporalTrace, split_window

__all__ = [
    "DegenerateRankingWarning",
    "CorrelationReport",
    "TopLCurve",
    "EvaluationReport",
    "pearson_rank_correlation",
    "top_l_curve",
    "evaluate_pipeline",
    "evaluate_sweep",
    "write_report",
]

SPEED_ORIENTATION = "ascending mean infection time: rank 1 is the fastest spreader"


class DegenerateRankingWarning(UserWarning):
    """A rank vector is constant, so its correlation is undefined."""


@dataclass(frozen=True)
class CorrelationReport:
    measure: str
    target: str
    rho: float
    n: int
    degenerate: bool = False


@dataclass(frozen=True)
class TopLCurve:
    """Mean actual influence of the top-L nodes, for L = 1..N."""

    measure: str
    points: tuple[tuple[int, float], ...]
    benchmark: tuple[tuple[int, float], ...]


def _aligned_ranks(x: RankingList, y: RankingList) -> tuple[np.ndarray, np.ndarray]:
    rx, ry = x.ranks(), y.ranks()
    if set(rx) != set(ry):
        raise ValueError("rankings cover different node sets")
    nodes = sorted(rx)
    return (np.array([rx[v] for v in nodes], dtype=float),
            np.array([ry[v] for v in nodes], dtype=float))


def pearson_rank_correlation(x: RankingList, y: RankingList) -> float:
    """Pearson correlation of the two (tie-averaged) rank vectors.

    A constant rank vector makes the coefficient undefined; 0 is returned and
    a :class:`DegenerateRankingWarning` is issued.
    """
    a, b = _aligned_ranks(x, y)
    da, db = a - a.mean(), b - b.mean()
    denom = math.sqrt(float(da @ da) * float(db @ db))
    if denom == 0.0:
        warnings.warn(f"constant ranking in {x.measure!r} or {y.measure!r}; rho set to 0",
                      DegenerateRankingWarning, stacklevel=2)
        return 0.0
    rho = float(da @ db) / denom
    return max(-1.0, min(1.0, rho))


def _prefix_means(values: Sequence[float]) -> tuple[tuple[int, float], ...]:
    return tuple((k, math.fsum(values[:k]) / k) for k in range(1, len(values) + 1))


def top_l_curve(predicted: RankingList, actual: Mapping[int, float]) -> TopLCurve:
    if set(predicted.nodes) != set(actual):
        raise ValueError("prediction and ground truth cover different node sets")
    ordered = [actual[v] for v in predicted.nodes]
    bench = sorted(actual.items(), key=lambda kv: (-kv[1], kv[0]))
    return TopLCurve(predicted.measure, _prefix_means(ordered),
                     _prefix_means([a for _, a in bench]))


@dataclass
class EvaluationReport:
    config: dict
    train_window: ObservationWindow
    test_window: ObservationWindow
    correlations: list[CorrelationReport]
    curves: dict[str, TopLCurve]
    outcomes: dict[int, SIROutcome]
    scores: dict[str, ScoreTable]
    notes: dict = field(default_factory=dict)

    def rho(self, measure: str, target: str = "range") -> float:
        for c in self.correlations:
            if c.measure == measure and c.target == target:
                return c.rho
        raise KeyError((measure, target))

    def to_dict(self) -> dict:
        benchmark = next(iter(self.curves.values())).benchmark if self.curves else ()
        return {
            "config": self.config,
            "notes": self.notes,
            "train_window": [self.train_window.begin, self.train_window.end],
            "test_window": [self.test_window.begin, self.test_window.end],
            "correlations": [
                {"measure": c.measure, "target": c.target, "rho": c.rho, "n": c.n,
                 "degenerate": c.degenerate}
                for c in self.correlations
            ],
            "top_l": {
                "benchmark": [p[1] for p in benchmark],
                **{m: [p[1] for p in c.points] for m, c in self.curves.items()},
            },
            "ground_truth": [
                {"node": o.seed_node, "mean_range": o.influence_range,
                 "mean_speed": o.influence_speed, "runs": o.runs}
                for o in self.outcomes.values()
            ],
            "scores": {m: {str(v): s for v, s in sorted(t.scores.items())}
                       for m, t in self.scores.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"


def _ground_truth_rankings(outcomes: Mapping[int, SIROutcome]) -> dict[str, RankingList]:
    ranges = ScoreTable("range", {v: o.influence_range for v, o in outcomes.items()})
    speeds = ScoreTable("speed", {v: o.influence_speed for v, o in outcomes.items()})
    return {"range": rank_nodes(ranges), "speed": rank_nodes(speeds, ascending=True)}


def _evaluate(train: TemporalTrace, test: TemporalTrace, sorec_config: SoRecConfig,
              sir_config: SIRConfig, measures: Sequence[str], workers: int,
              config_echo: dict, scores: dict[str, ScoreTable] | None = None
              ) -> EvaluationReport:
    if scores is None:
        scores = compute_scores(train, measures, sorec_config)
    outcomes = monte_carlo_influence(test, sir_config, workers=workers)
    truth = _ground_truth_rankings(outcomes)
    actual_range = {v: o.influence_range for v, o in outcomes.items()}

    correlations = []
    curves = {}
    for name in measures:
        ranking = rank_nodes(scores[name])
        for target, reference in truth.items():
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", DegenerateRankingWarning)
                rho = pearson_rank_correlation(ranking, reference)
            correlations.append(CorrelationReport(name, target, rho, len(ranking),
                                                  degenerate=bool(caught)))
        curves[name] = top_l_curve(ranking, actual_range)

    notes = {
        "speed_orientation": SPEED_ORIENTATION,
        "rank_correlation": "Pearson on tie-averaged rank vectors",
        "ground_truth_window": "test window only",
    }
    baselines = [m for m in measures if m != "sorec"]
    if "sorec" in measures and baselines:
        sorec_rho = next(c.rho for c in correlations
                         if c.measure == "sorec" and c.target == "range")
        notes["sorec_range_rho_exceeds_all_baselines"] = all(
            sorec_rho > c.rho for c in correlations
            if c.target == "range" and c.measure in baselines)
    return EvaluationReport(config_echo, train.window, test.window, correlations,
                            curves, outcomes, scores, notes)


def _config_echo(sorec_config: SoRecConfig, sir_config: SIRConfig,
                 measures: Sequence[str], extra: Mapping) -> dict:
    return {
        **extra,
        "measures": list(measures),
        "max_intermediates": sorec_config.max_intermediates,
        "epsilon": sorec_config.epsilon,
        "sir": sir_config.describe(),
    }


def evaluate_pipeline(trace: TemporalTrace, split: float = 0.6,
                      sorec_config: SoRecConfig = SoRecConfig(),
                      sir_config: SIRConfig = SIRConfig(),
                      measures: Sequence[str] = MEASURES, workers: int = 1,
                      granularity: str = "1 slot") -> EvaluationReport:
    """Train on the first ``split`` of the window, test SIR on the rest."""
    train, test = split_window(trace, split)
    echo = _config_echo(sorec_config, sir_config, measures,
                        {"split": split, "window": [trace.window.begin, trace.window.end],
                         "slot_granularity": granularity})
    return _evaluate(train, test, sorec_config, sir_config, measures, workers, echo)


def evaluate_sweep(trace: TemporalTrace, train_length: int, test_length: int,
                   gaps: Sequence[int] = (0,),
                   sorec_config: SoRecConfig = SoRecConfig(),
                   sir_config: SIRConfig = SIRConfig(),
                   measures: Sequence[str] = MEASURES,
                   workers: int = 1) -> dict[int, EvaluationReport]:
    """Fixed training window, test windows moved ``gap`` slots further out.

    Shows how prediction quality decays as the test period moves away from
    the history used for ranking.
    """
    w = trace.window
    train_window = ObservationWindow(w.begin, w.begin + train_length)
    if train_window.end > w.end:
        raise ValueError("training window exceeds the trace")
    train = TemporalTrace(trace.records, train_window, trace.nodes)
    scores = compute_scores(train, measures, sorec_config)
    reports = {}
    for gap in gaps:
        start = train_window.end + gap
        test_window = ObservationWindow(start, start + test_length)
        if test_window.end > w.end:
            raise ValueError(f"test window for gap {gap} exceeds the trace")
        test = TemporalTrace(trace.records, test_window, trace.nodes)
        echo = _config_echo(sorec_config, sir_config, measures,
                            {"train_length": train_length, "test_length": test_length,
                             "gap": gap})
        reports[gap] = _evaluate(train, test, sorec_config, sir_config, measures,
                                 workers, echo, scores)
    return reports


def write_report(report: EvaluationReport, outdir, curve_files: bool = True) -> Path:
    """Write ``report.json`` plus CSV tables and plain-text curve files."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())

    rows = ["measure,target,rho,n,degenerate"]
    rows.extend(f"{c.measure},{c.target},{c.rho!r},{c.n},{int(c.degenerate)}"
                for c in report.correlations)
    (out / "correlations.csv").write_text("\n".join(rows) + "\n")

    measures = list(report.curves)
    if measures:
        bench = report.curves[measures[0]].benchmark
        rows = ["L,benchmark," + ",".join(measures)]
        for k in range(len(bench)):
            vals = [repr(report.curves[m].points[k][1]) for m in measures]
            rows.append(f"{k + 1},{bench[k][1]!r}," + ",".join(vals))
        (out / "top_l.csv").write_text("\n".join(rows) + "\n")
        if curve_files:
            for m in ["benchmark"] + measures:
                pts = bench if m == "benchmark" else report.curves[m].points
                text = f"# L mean_range ({m})\n" + "".join(f"{L} {v!r}\n" for L, v in pts)
                (out / f"top_l_{m}.dat").write_text(text)

    rows = ["node,mean_range,mean_speed,runs"]
    rows.extend(f"{o.seed_node},{o.influence_range!r},{o.influence_speed!r},{o.runs}"
                for o in report.outcomes.values())
    (out / "ground_truth.csv").write_text("\n".join(rows) + "\n")
    return out
