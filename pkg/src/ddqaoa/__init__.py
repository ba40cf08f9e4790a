"""Data-driven QAOA for weighted Max-Cut with density-based parameter transfer."""

from .graph import (
    GraphGenSpec,
    WeightedGraph,
    generate_test_suite,
    graph_id,
    is_planar,
    normalize_weights,
    normalized_density,
    random_graph,
)
from .gw import gw_baseline, hyperplane_round, solve_relaxation
from .maxcut import approximation_ratio, brute_force_maxcut, cut_value
from .noise import NoiseModel, run_noisy_qaoa_density, run_noisy_qaoa_trajectories
from .optimize import cobyla_optimize, fourier_optimize, multistart_optimize
from .powerflow import PowerFlowCase, line_weights, load_sample_case, solve_power_flow
from .simulator import (
    QaoaEvaluator,
    QaoaParams,
    SampleDistribution,
    StateVector,
    estimate_from_samples,
    exact_expectation,
    run_qaoa_circuit,
    sample,
)
from .transfer import (
    MappingTable,
    ParamRecord,
    ParameterDatabase,
    SelectionPolicy,
    build_database,
    build_mapping_table,
    expand_database,
    select_params,
)

__version__ = "0.1.0"

__all__ = [
    "GraphGenSpec", "MappingTable", "NoiseModel", "ParamRecord", "ParameterDatabase", "PowerFlowCase",
    "QaoaEvaluator", "QaoaParams", "SampleDistribution", "SelectionPolicy", "StateVector", "WeightedGraph",
    "approximation_ratio", "brute_force_maxcut", "build_database", "build_mapping_table", "cobyla_optimize",
    "cut_value", "estimate_from_samples", "exact_expectation", "expand_database", "fourier_optimize",
    "generate_test_suite", "graph_id", "gw_baseline", "hyperplane_round", "is_planar", "line_weights",
    "load_sample_case", "multistart_optimize", "normalize_weights", "normalized_density", "random_graph",
    "run_noisy_qaoa_density", "run_noisy_qaoa_trajectories", "run_qaoa_circuit", "sample", "select_params",
    "solve_power_flow", "solve_relaxation",
]
