"""Cycle clustering of non-reversible Markov chains.

Detects global cyclic behavior by partitioning the state space into
cyclically ordered clusters that maximize net flow between consecutive
clusters plus weighted coherence, solved exactly by LP-based branch and
bound over a linearized binary quadratic model.
"""

__version__ = "0.1.0"

from .bnb import HeuristicsConfig, SolveResult, SolverConfig, branch_and_bound
from .clustering import (
    CycleClustering,
    ObjectiveValue,
    canonicalize,
    objective,
    reflect,
    successor,
)
from .heuristics import brute_force, exchange_improvement, greedy_heuristic, rounding_heuristic
from .markov import (
    FlowMatrix,
    ProjectedMatrix,
    StationaryDistribution,
    TransitionMatrix,
    coherence,
    flow_matrix,
    net_flow,
    project,
    stationary_distribution,
    validate_stochastic,
)
from .mip import MipInstance, build_mip, clustering_from_solution, export_model, parse_model
from .simplex import LpResult, solve_lp
