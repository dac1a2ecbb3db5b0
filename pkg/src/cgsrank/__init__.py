"""Influential-node ranking toolkit.

Rank nodes of an undirected graph by expected spreading power: simulate
SIR cascades for ground-truth labels, train a small conv + graph-aggregation
regressor on synthetic BA graphs, and compare against seven classical
centrality baselines with rank-agreement metrics.
"""
from .centrality import (
    KNOWN_METHODS,
    SCORES_CSV_HEADER,
    CentralityScores,
    Partition,
    betweenness_centrality,
    degree_centrality,
    h_index,
    k_core,
    louvain,
    mdd,
    neighborhood_degree,
    read_scores_csv,
    v_community,
    write_scores_csv,
)
from .errors import (
    CgsError,
    FingerprintMismatchError,
    NumericError,
    ParseError,
    WeightFormatError,
)
from .estimator import CgsRanker
from .graph import (
    STATS_CSV_HEADER,
    Graph,
    NetworkStats,
    average_neighbor_degree,
    feature_matrix,
    generate_ba,
    load_edge_list,
    network_stats,
    save_edge_list,
    stats_csv,
)
from .metrics import (
    RankingReport,
    build_report,
    jaccard_top_k,
    kendall_tau,
    monotonicity_index,
    rank_histogram,
    top_k_ids,
)
from .model import (
    AdamState,
    Gradients,
    ModelWeights,
    TrainConfig,
    adam_step,
    backward,
    encode,
    forward,
    init_adam_state,
    init_weights,
    load_weights,
    mse_loss,
    predict,
    sage_layer,
    save_weights,
    train,
)
from .rng import STREAM_CODES, generator, substream_seed
from .sir import (
    LABELS_CSV_HEADER,
    InfluenceLabels,
    SirParams,
    exact_influence,
    influence_labels,
    load_labels,
    save_labels,
    sir_trial,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # graph
    "Graph",
    "NetworkStats",
    "STATS_CSV_HEADER",
    "average_neighbor_degree",
    "feature_matrix",
    "generate_ba",
    "load_edge_list",
    "network_stats",
    "save_edge_list",
    "stats_csv",
    # sir
    "InfluenceLabels",
    "LABELS_CSV_HEADER",
    "SirParams",
    "exact_influence",
    "influence_labels",
    "load_labels",
    "save_labels",
    "sir_trial",
    # centrality
    "CentralityScores",
    "KNOWN_METHODS",
    "Partition",
    "SCORES_CSV_HEADER",
    "betweenness_centrality",
    "degree_centrality",
    "h_index",
    "k_core",
    "louvain",
    "mdd",
    "neighborhood_degree",
    "read_scores_csv",
    "v_community",
    "write_scores_csv",
    # model
    "AdamState",
    "Gradients",
    "ModelWeights",
    "TrainConfig",
    "adam_step",
    "backward",
    "encode",
    "forward",
    "init_adam_state",
    "init_weights",
    "load_weights",
    "mse_loss",
    "predict",
    "sage_layer",
    "save_weights",
    "train",
    # metrics
    "RankingReport",
    "build_report",
    "jaccard_top_k",
    "kendall_tau",
    "monotonicity_index",
    "rank_histogram",
    "top_k_ids",
    # estimator
    "CgsRanker",
    # rng
    "STREAM_CODES",
    "generator",
    "substream_seed",
    # errors
    "CgsError",
    "FingerprintMismatchError",
    "NumericError",
    "ParseError",
    "WeightFormatError",
]
