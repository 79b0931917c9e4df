"""Fitness-landscape and local-optima-network analysis of bounded feedforward
architecture spaces, with a from-scratch trainer and an iterated local search
harness."""

from .arch_space import (
    Arch,
    SpaceConfig,
    adjacency_pairs,
    adjacency_report,
    canonical_key,
    decode_arch,
    depth_offsets,
    encode_arch,
    enumerate_space,
    neighborhood,
    width_offsets,
)
from .fitness import (
    FitnessTable,
    bimodal_provider,
    build_table,
    linear_provider,
    load_fitness_table,
    r_squared,
    r_squared_multioutput,
    save_fitness_table,
    synthetic_bimodal,
    synthetic_linear,
    table_digest,
)
from .landscape import (
    BasinMap,
    Landscape,
    NeutralityWarning,
    compute_basins,
    find_local_optima,
    hill_climb,
    hill_climb_path,
)
from .lon import (
    LonGraph,
    LonMetrics,
    MlonGraph,
    build_lon,
    build_report,
    compute_metrics,
    derive_mlon,
    export_lon_dot,
    export_lon_json,
    load_lon_json,
    topological_order,
)
from .search import IlsConfig, IlsTrace, aggregate_ils, perturb, run_ils, run_many
from .trainer import (
    BatchResult,
    Dataset,
    TrainConfig,
    build_network,
    evaluate_batch,
    ingest_dataset,
    init_weights,
    parameter_count,
    train_once,
)

__version__ = "0.1.0"
