"""DPLL SAT solving with a simulated hot-swapping BCP accelerator."""

from .cnf import (
    Clause,
    ClauseStatus,
    Formula,
    ParseError,
    eval_clause,
    eval_formula,
    gen_random,
    parse_dimacs,
    serialize_dimacs,
)
from .partition import PartitionLimits, PartitionPlan, dispersion_stats, greedy_partition
from .perf import CostModel, PerfCounters
from .solver import SolverConfig, SolveResult, Verdict, solve

__all__ = [
    "Clause", "ClauseStatus", "Formula", "ParseError", "eval_clause", "eval_formula",
    "gen_random", "parse_dimacs", "serialize_dimacs", "PartitionLimits", "PartitionPlan",
    "dispersion_stats", "greedy_partition", "CostModel", "PerfCounters", "SolverConfig",
    "SolveResult", "Verdict", "solve",
]
