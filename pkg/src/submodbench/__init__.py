"""Benchmarking iterative search heuristics on submodular problems."""

from pathlib import Path

from .algorithms import ALGORITHMS, AlgorithmSpec, RunTrace, run
from .constraints import CostModel, cost, parse_cost_spec
from .instances import DirectedGraph, TTPInstance, UndirectedGraph, load_instance
from .kernels import BACKEND
from .problems import Evaluation, MaxCoverage, MaxCut, MaxInfluence, PackingWhileTraveling

FIXTURES = Path(__file__).parent / "fixtures"

__all__ = [
    "ALGORITHMS",
    "AlgorithmSpec",
    "BACKEND",
    "CostModel",
    "DirectedGraph",
    "Evaluation",
    "FIXTURES",
    "MaxCoverage",
    "MaxCut",
    "MaxInfluence",
    "PackingWhileTraveling",
    "RunTrace",
    "TTPInstance",
    "UndirectedGraph",
    "cost",
    "load_instance",
    "parse_cost_spec",
    "run",
]
