"""Centrality analysis of directed weighted trade networks and its relation to GDP."""

__version__ = "0.1.0"

from tradenet.centrality import (  # noqa: E402
    CentralityVector,
    SolverOptions,
    build_transition,
    degree_in,
    degree_out,
    eigenvector_in,
    eigenvector_out,
    randomwalk_in,
    randomwalk_out,
)
from tradenet.netcore import AdjacencyMatrix, CountryIndex, TradeMatrix, build_trade_matrix, normalize  # noqa: E402
from tradenet.stats import CorrelationResult, GroupAssignment, classify, p_value, pearson  # noqa: E402

__all__ = [
    "AdjacencyMatrix",
    "CentralityVector",
    "CorrelationResult",
    "CountryIndex",
    "GroupAssignment",
    "SolverOptions",
    "TradeMatrix",
    "build_trade_matrix",
    "build_transition",
    "classify",
    "degree_in",
    "degree_out",
    "eigenvector_in",
    "eigenvector_out",
    "normalize",
    "p_value",
    "pearson",
    "randomwalk_in",
    "randomwalk_out",
]
