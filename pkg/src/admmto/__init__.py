"""Binary TV-regularized heat-sink topology optimization by ADMM with a funnel penalty schedule."""
from .admm import AdmmProblem, AdmmState, FunnelParams, IterationRecord, RunResult, admm_iteration, initialize, run
from .config import ConfigError, SolverConfig, load_config, parse_config
from .mesh import AdjacencyGraph, Mesh, build_adjacency, build_unit_square_mesh

__all__ = [
    "AdjacencyGraph", "AdmmProblem", "AdmmState", "ConfigError", "FunnelParams", "IterationRecord", "Mesh",
    "RunResult", "SolverConfig", "admm_iteration", "build_adjacency", "build_unit_square_mesh", "initialize",
    "load_config", "parse_config", "run",
]
