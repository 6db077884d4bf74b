"""Social-relation based centrality for temporal contact networks."""
from .centrality import (
    MEASURES,
    RankingList,
    ScoreTable,
    SoRecConfig,
    aggregate_graph,
    baseline_centrality,
    compute_scores,
    compute_sorec,
    influence_entropy,
    influence_probabilities,
    rank_nodes,
    sorec,
)
from .evaluation import (
    EvaluationReport,
    evaluate_pipeline,
    evaluate_sweep,
    pearson_rank_correlation,
    top_l_curve,
    write_report,
)
from .relations import (
    InfluenceSphere,
    IndirectPath,
    SRSMatrix,
    enumerate_indirect_paths,
    in_srs,
    in_srs_matrix,
    influence_sphere,
    influence_spheres,
    path_influence,
    reference_metrics,
    srs,
    srs_matrix,
)
from .sir import SIRConfig, SIROutcome, monte_carlo_influence, run_sir
from .trace import (
    ContactRecord,
    ContactTimeline,
    ObservationWindow,
    SynthConfig,
    TemporalTrace,
    build_timelines,
    generate_synthetic,
    parse_trace,
    read_trace,
    serialize_trace,
    split_window,
    write_trace,
)

__version__ = "0.1.0"
