"""Synchronized hypergraph rewriting: judgements, productions, and
derivation of transitions."""

from .derive import Blocked, EnumerationResult, derive_transition, enumerate_transitions
from .graph import (
    Edge,
    Graph,
    GraphParseError,
    edge_names,
    graph,
    graph_iso,
    isolated_nodes,
    parse_graph,
    parse_name,
    print_graph,
    rename_graph,
    same_graph,
    sorted_edges,
    to_dot,
)
from .production import (
    ActionEntry,
    HgFile,
    Production,
    Transition,
    action_map,
    fusion_from_pairs,
    parse_hg,
    parse_production,
    print_production,
    sort_entries,
    transition_rename,
    transitions_equal_up_to_renaming,
    validate_production,
)

__all__ = [
    "ActionEntry",
    "Blocked",
    "Edge",
    "EnumerationResult",
    "Graph",
    "GraphParseError",
    "HgFile",
    "Production",
    "Transition",
    "action_map",
    "derive_transition",
    "edge_names",
    "enumerate_transitions",
    "fusion_from_pairs",
    "graph",
    "graph_iso",
    "isolated_nodes",
    "parse_graph",
    "parse_hg",
    "parse_name",
    "parse_production",
    "print_graph",
    "print_production",
    "rename_graph",
    "same_graph",
    "sort_entries",
    "sorted_edges",
    "to_dot",
    "transition_rename",
    "transitions_equal_up_to_renaming",
    "validate_production",
]
