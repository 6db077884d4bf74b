import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import spearmanr

from sorec.centrality import ScoreTable, rank_nodes
from sorec.evaluation import (
    DegenerateRankingWarning,
    evaluate_pipeline,
    evaluate_sweep,
    pearson_rank_correlation,
    top_l_curve,
    write_report,
)
from sorec.relations import srs_matrix
from sorec.sir import SIRConfig
from sorec.trace import (
    ContactRecord,
    ObservationWindow,
    SynthConfig,
    TemporalTrace,
    TraceValidationError,
    generate_synthetic,
    split_window,
)

from oracles import spearman_closed_form


def ranking(scores, name="x"):
    return rank_nodes(ScoreTable(name, scores))


def by_rank(ranks):
    # rank vector -> scores that reproduce it
    return {k: -float(r) for k, r in enumerate(ranks)}


def test_identical_and_reversed():
    x = ranking({0: 4.0, 1: 3.0, 2: 2.0, 3: 1.0})
    y = ranking({0: 1.0, 1: 2.0, 2: 3.0, 3: 4.0})
    assert pearson_rank_correlation(x, x) == pytest.approx(1.0, abs=1e-12)
    assert pearson_rank_correlation(x, y) == pytest.approx(-1.0, abs=1e-12)


def test_four_node_example():
    x = ranking(by_rank([1, 2, 3, 4]))
    y = ranking(by_rank([2, 1, 4, 3]))
    assert spearman_closed_form([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6, abs=1e-15)
    assert pearson_rank_correlation(x, y) == pytest.approx(0.6, abs=1e-12)


def test_constant_ranking_warns():
    x = ranking({0: 1.0, 1: 1.0, 2: 1.0})
    y = ranking({0: 1.0, 1: 2.0, 2: 3.0})
    with pytest.warns(DegenerateRankingWarning):
        assert pearson_rank_correlation(x, y) == 0.0


def test_mismatched_nodes():
    with pytest.raises(ValueError):
        pearson_rank_correlation(ranking({0: 1.0}), ranking({1: 1.0}))


scores_st = st.lists(st.integers(-5, 5).map(float), min_size=3, max_size=30)


@settings(max_examples=200, deadline=None)
@given(scores_st, st.randoms(use_true_random=False))
def test_rho_properties(xs, rnd):
    ys = [float(rnd.randint(-5, 5)) for _ in xs]
    x = ranking(dict(enumerate(xs)))
    y = ranking(dict(enumerate(ys)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateRankingWarning)
        rho = pearson_rank_correlation(x, y)
        assert -1.0 <= rho <= 1.0
        assert rho == pytest.approx(pearson_rank_correlation(y, x), abs=1e-12)
        transformed = ranking({k: math.exp(v) * 3 + 1 for k, v in enumerate(xs)})
        assert pearson_rank_correlation(transformed, y) == pytest.approx(rho, abs=1e-12)
    if len(set(xs)) > 1 and len(set(ys)) > 1:
        assert rho == pytest.approx(spearmanr(xs, ys).statistic, abs=1e-12)


def test_top_l_hand_example():
    actual = {"a": 4.0, "b": 1.0, "c": 3.0, "d": 2.0}
    pred = ranking({"b": 4.0, "a": 3.0, "d": 2.0, "c": 1.0})
    curve = top_l_curve(pred, actual)
    assert [p for _, p in curve.points] == pytest.approx([1.0, 2.5, 7 / 3, 2.5], abs=1e-15)
    assert [p for _, p in curve.benchmark] == pytest.approx([4.0, 3.5, 3.0, 2.5], abs=1e-15)
    assert [L for L, _ in curve.points] == [1, 2, 3, 4]


def test_top_l_oracle_predictor():
    actual = {0: 5.0, 1: 2.0, 2: 9.0}
    curve = top_l_curve(ranking(actual), actual)
    assert curve.points == curve.benchmark


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(1.0, 100.0), min_size=1, max_size=40), st.randoms(use_true_random=False))
def test_benchmark_dominates(actual_values, rnd):
    actual = dict(enumerate(actual_values))
    pred = ranking({k: rnd.random() for k in actual})
    curve = top_l_curve(pred, actual)
    for (_, p), (_, b) in zip(curve.points, curve.benchmark):
        assert b >= p
    assert curve.points[-1][1] == curve.benchmark[-1][1]


# --------------------------------------------------------------------------
# pipeline


@pytest.fixture(scope="module")
def small_trace():
    return generate_synthetic(SynthConfig(node_count=30, communities=3, hub_nodes=(0, 10, 20),
                                          window_length=3000, seed=4))


SMALL_SIR = SIRConfig(infection_prob=0.1, recovery_prob=0.02, runs=30, rng_seed=6)


def test_pipeline_report(small_trace, tmp_path):
    report = evaluate_pipeline(small_trace, 0.6, sir_config=SMALL_SIR)
    assert report.train_window == ObservationWindow(0, 1800)
    assert report.test_window == ObservationWindow(1800, 3000)
    assert len(report.correlations) == 7 * 2
    assert all(math.isfinite(c.rho) for c in report.correlations)
    assert report.rho("sorec", "range") > 0
    for curve in report.curves.values():
        for (_, p), (_, b) in zip(curve.points, curve.benchmark):
            assert b >= p
    out = write_report(report, tmp_path)
    data = json.loads((out / "report.json").read_text())
    assert data["config"]["split"] == 0.6
    assert data["config"]["sir"]["runs"] == 30
    assert "speed_orientation" in data["notes"]
    assert len(data["top_l"]["benchmark"]) == 30
    for name in ("correlations.csv", "top_l.csv", "ground_truth.csv", "top_l_sorec.dat",
                 "top_l_benchmark.dat"):
        assert (out / name).exists()


def test_pipeline_deterministic(small_trace):
    a = evaluate_pipeline(small_trace, 0.6, sir_config=SMALL_SIR).to_json()
    b = evaluate_pipeline(small_trace, 0.6, sir_config=SMALL_SIR).to_json()
    assert a == b


def test_ground_truth_uses_test_window_only():
    # all contact happens in the training half, so nobody spreads at test time
    trace = TemporalTrace((ContactRecord(0, 1, 0, 40), ContactRecord(1, 2, 0, 40)),
                          ObservationWindow(0, 100))
    report = evaluate_pipeline(trace, 0.5, measures=("degree",),
                               sir_config=SIRConfig(infection_prob=1.0, runs=3))
    assert all(o.influence_range == 1 for o in report.outcomes.values())
    assert all(c.degenerate for c in report.correlations)


def test_symmetric_halves_give_equal_srs():
    half = [(0, 1, 0, 5), (0, 1, 10, 12), (1, 2, 3, 9), (0, 2, 20, 30)]
    records = [ContactRecord(a, b, s, e) for a, b, s, e in half]
    records += [ContactRecord(a, b, s + 50, e + 50) for a, b, s, e in half]
    trace = TemporalTrace(tuple(records), ObservationWindow(0, 100))
    train, test = split_window(trace, 0.5)
    assert np.array_equal(srs_matrix(train).values, srs_matrix(test).values)


def test_empty_test_window():
    trace = TemporalTrace((ContactRecord(0, 1, 0, 3),), ObservationWindow(0, 10))
    with pytest.raises(TraceValidationError):
        evaluate_pipeline(trace, 0.99)


def test_sweep(small_trace):
    reports = evaluate_sweep(small_trace, 1000, 500, gaps=(0, 1000),
                             sir_config=SIRConfig(runs=5, rng_seed=1), measures=("sorec", "degree"))
    assert set(reports) == {0, 1000}
    assert reports[1000].test_window == ObservationWindow(2000, 2500)
    # training scores are shared between gaps
    assert reports[0].scores["sorec"] == reports[1000].scores["sorec"]
    with pytest.raises(ValueError):
        evaluate_sweep(small_trace, 1000, 500, gaps=(2000,))
