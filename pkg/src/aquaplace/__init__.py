"""Risk-aware bi-objective sensor placement on water-style networks.

Minimizes both the mean and the standard deviation of the minimum detection
time over simulated contamination events, with an NSGA-II engine, an
exhaustive oracle for small instances, and search-space vs information-space
convergence diagnostics.
"""

__version__ = "0.1.0"

from .engine import (
    EngineConfig,
    HypervolumeStagnationCriterion,
    Individual,
    KappaFrobeniusCriterion,
    KappaHammingCriterion,
    RunResult,
    run,
)
from .errors import AquaplaceError, CapExceededError, ParseError, ValidationError
from .events import EventTensor, TimeGrid, load_event_tensor, save_event_tensor, simulate_plug_flow
from .indicators import GenerationRecord, frobenius, hamming, kappa
from .network import Edge, Network, Node, parse_network, write_network
from .oracle import ExhaustiveResult, PairwiseResult, enumerate_feasible, exhaustive_pareto, pairwise_analysis
from .pareto import Dominance, crowding_distance, dominates, hypervolume_2d, non_dominated_sort
from .placement import (
    ObjectivePoint,
    PenaltyPolicy,
    count_feasible,
    detect,
    objectives,
    placement_matrix,
    violation,
)

__all__ = [
    "AquaplaceError", "CapExceededError", "ParseError", "ValidationError",
    "Node", "Edge", "Network", "parse_network", "write_network",
    "TimeGrid", "EventTensor", "simulate_plug_flow", "load_event_tensor", "save_event_tensor",
    "ObjectivePoint", "PenaltyPolicy", "placement_matrix", "detect", "objectives",
    "violation", "count_feasible",
    "Dominance", "dominates", "non_dominated_sort", "crowding_distance", "hypervolume_2d",
    "hamming", "frobenius", "kappa", "GenerationRecord",
    "EngineConfig", "Individual", "RunResult", "run",
    "KappaHammingCriterion", "KappaFrobeniusCriterion", "HypervolumeStagnationCriterion",
    "ExhaustiveResult", "PairwiseResult", "enumerate_feasible", "exhaustive_pareto",
    "pairwise_analysis",
]
