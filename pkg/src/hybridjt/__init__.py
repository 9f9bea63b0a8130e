"""Exact inference on discrete Bayesian networks with layer-parallel junction trees."""

from .bif import parse_bif, read_bif, write_bif
from .datasets import bundled_networks, grid_network, load_network
from .estimator import JunctionTreeInference
from .exceptions import (
    BifSyntaxError,
    CycleError,
    InconsistentDivision,
    NetworkError,
    ScopeError,
    ZeroProbabilityEvidence,
)
from .inference import EngineMode, Propagator, QueryResult, build_layer_tasks, run_case
from .junction_tree import JunctionTree, build_junction_tree
from .network import BayesianNetwork, Cpt, Evidence, Variable, sample_evidence, topological_order, validate
from .potential import PotentialTable, build_index_mapping

__version__ = "0.1.0"

__all__ = [
    "BayesianNetwork",
    "BifSyntaxError",
    "Cpt",
    "CycleError",
    "EngineMode",
    "Evidence",
    "InconsistentDivision",
    "JunctionTree",
    "JunctionTreeInference",
    "NetworkError",
    "PotentialTable",
    "Propagator",
    "QueryResult",
    "ScopeError",
    "Variable",
    "ZeroProbabilityEvidence",
    "build_index_mapping",
    "build_junction_tree",
    "build_layer_tasks",
    "bundled_networks",
    "grid_network",
    "load_network",
    "parse_bif",
    "read_bif",
    "run_case",
    "sample_evidence",
    "topological_order",
    "validate",
    "write_bif",
]
