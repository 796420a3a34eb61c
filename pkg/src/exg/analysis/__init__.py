"""Parallelism analysis of execution graphs."""

from exg.analysis.automorphism import AutGroup, automorphism_group, brute_force_aut, is_automorphism
from exg.analysis.digraph import (
    Digraph,
    Partition,
    QuotientGraph,
    Reachability,
    check_chain,
    exec_time_class,
    exec_time_quotient,
    ind_class,
    ind_class_sizes,
    independent,
    is_completely_parallel,
    is_completely_serial,
    is_dag,
    is_dag_preserving,
    is_independent_set,
    is_maximally_independent,
    longest_path_vertices,
    quotient,
    reachability,
    topological_order,
)
from exg.analysis.explore import AnalysisReport, SymExploreResult, analysis_view, analyze, sym_explore

__all__ = [
    "AnalysisReport",
    "AutGroup",
    "Digraph",
    "Partition",
    "QuotientGraph",
    "Reachability",
    "SymExploreResult",
    "analysis_view",
    "analyze",
    "automorphism_group",
    "brute_force_aut",
    "check_chain",
    "exec_time_class",
    "exec_time_quotient",
    "ind_class",
    "ind_class_sizes",
    "independent",
    "is_automorphism",
    "is_completely_parallel",
    "is_completely_serial",
    "is_dag",
    "is_dag_preserving",
    "is_independent_set",
    "is_maximally_independent",
    "longest_path_vertices",
    "quotient",
    "reachability",
    "sym_explore",
    "topological_order",
]
