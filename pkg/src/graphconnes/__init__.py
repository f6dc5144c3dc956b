"""Graph operator calculus and the Connes distance on finite graphs."""
# ruff: noqa: F401
from .connes import (
    AdmissibleFunction,
    AprioriBounds,
    DistanceResult,
    SolverConfig,
    Status,
    apriori_bounds,
    connes_distance,
    distance_matrix,
    oracle_connes_distance,
    path_closed_form,
    structural_checks,
)
from .edgelist import LabelledGraph, parse_edgelist, read_edgelist, write_edgelist
from .graph import (
    UNREACHABLE,
    Graph,
    GraphError,
    binary_tree,
    build_graph,
    cycle_graph,
    directed_lattice_2d,
    directed_path_graph,
    generate,
    graph_distance,
    path_graph,
    random_graph,
)
from .spectral import NormEstimate, norm_exhaustion, operator_norm, spectral_norm

__version__ = "0.1.0"
