"""Benchmark matrix, execution-time breakdowns and CSV output.

All numbers written to CSV are modeled (cycle counts and per-event software
costs), so a seeded run is byte-for-byte reproducible.  Wall-clock timings
only go to the human-readable summary.
"""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple

from .cnf import Formula, gen_random
from .perf import (
    BCP_EVENT_DEFINITION,
    CostModel,
    effective_throughput,
    engine_throughput,
    speedup,
    time_breakdown,
    total_time_s,
)
from .solver import SolverConfig, SolveResult, _SweepPropagator, AssignmentTrail, solve

log = logging.getLogger(__name__)

BENCH_SCHEMA = "bcpaccel-bench/1"
BREAKDOWN_SCHEMA = "bcpaccel-breakdown/1"

BENCH_COLUMNS = [
    "formula_id", "vars", "clauses", "backend", "verdict", "decisions", "swaps",
    "bcp_events", "engine_cycles", "swap_cycles", "interface_cycles", "total_time_ns",
    "engine_bcps", "effective_bcps", "speedup", "partitions",
]
BREAKDOWN_COLUMNS = [
    "formula_id", "vars", "clauses", "engine", "swap", "interface", "software",
    "swaps", "partitions",
]

DEFAULT_VARIABLE_SIZES = (63, 126, 252, 630)
DEFAULT_CLAUSE_SIZES = (224, 448, 2240, 22400)
DEFAULT_BENCH_DECISIONS = 200


@dataclass
class BenchSpec:
    variable_sizes: Sequence[int] = DEFAULT_VARIABLE_SIZES
    clause_sizes: Sequence[int] = DEFAULT_CLAUSE_SIZES
    clause_len: int = 3
    seeds: Sequence[int] = (1,)
    backends: Sequence[str] = ("software", "hw-sim")

    def __post_init__(self):
        if not (self.variable_sizes and self.clause_sizes and self.seeds and self.backends):
            raise ValueError("bench spec lists must be non-empty")
        unknown = set(self.backends) - {"software", "hw-sim"}
        if unknown:
            raise ValueError(f"unknown backends {sorted(unknown)}")


def feasible(num_vars: int, num_clauses: int) -> bool:
    """Cells with fewer than vars/2 clauses are skipped (rendered NA)."""
    return 2 * num_clauses >= num_vars


def bench_cells(spec: BenchSpec) -> List[Tuple[int, int, int]]:
    cells = []
    for c in spec.clause_sizes:
        for v in spec.variable_sizes:
            if not feasible(v, c):
                log.info("skipping infeasible cell vars=%d clauses=%d", v, c)
                continue
            for seed in spec.seeds:
                cells.append((v, c, seed))
    return cells


def formula_id(num_vars: int, num_clauses: int, clause_len: int, seed: int) -> str:
    return f"rand-v{num_vars}-c{num_clauses}-k{clause_len}-s{seed}"


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.3f}"


def result_row(fid: str, formula: Formula, res: SolveResult, cost: CostModel,
               ratio: Optional[float]) -> Dict[str, str]:
    pc = res.counters
    hw = res.backend == "hw-sim"
    return {
        "formula_id": fid,
        "vars": str(formula.num_vars),
        "clauses": str(formula.num_clauses),
        "backend": res.backend,
        "verdict": res.verdict.value,
        "decisions": str(pc.decisions),
        "swaps": str(pc.swaps),
        "bcp_events": str(pc.bcp_events),
        "engine_cycles": str(pc.engine_cycles),
        "swap_cycles": str(pc.swap_cycles),
        "interface_cycles": str(pc.interface_cycles),
        "total_time_ns": _fmt(total_time_s(pc, cost) * 1e9),
        "engine_bcps": _fmt(engine_throughput(pc, cost)) if hw and pc.engine_cycles else "",
        "effective_bcps": _fmt(effective_throughput(pc, cost)) if total_time_s(pc, cost) > 0 else "",
        "speedup": "" if ratio is None else f"{ratio:.6f}",
        "partitions": str(res.partitions),
    }


def run_formula(fid: str, formula: Formula, cfg: SolverConfig, backends: Iterable[str]):
    """Solve ``formula`` on each backend; returns (rows, results by backend)."""
    results = {b: solve(formula, replace(cfg, backend=b)) for b in backends}
    ratio = None
    if "software" in results and "hw-sim" in results:
        ratio = speedup(results["hw-sim"].counters, results["software"].counters, cfg.cost)
    rows = []
    for b, res in results.items():
        r = ratio if b == "hw-sim" else (1.0 if ratio is not None else None)
        rows.append(result_row(fid, formula, res, cfg.cost, r))
    return rows, results


def _run_cell(args):
    v, c, seed, k, cfg, backends = args
    fid = formula_id(v, c, k, seed)
    t0 = time.perf_counter()
    rows, results = run_formula(fid, gen_random(v, c, k, seed), cfg, backends)
    log.info("%s done in %.1fs (%s)", fid, time.perf_counter() - t0,
             ", ".join(f"{b}={r.verdict.value}" for b, r in results.items()))
    return rows


def run_bench(spec: BenchSpec, cfg: SolverConfig, jobs: int = 1) -> List[Dict[str, str]]:
    tasks = [(v, c, s, spec.clause_len, cfg, tuple(spec.backends)) for v, c, s in bench_cells(spec)]
    if jobs > 1 and cfg.trace is None:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_cell, tasks))
    else:
        chunks = [_run_cell(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def _header_comment(schema: str) -> str:
    return f"# {schema}; {BCP_EVENT_DEFINITION}\n"


def write_csv(rows: List[Dict[str, str]], columns: List[str], schema: str, fh: TextIO) -> None:
    fh.write(_header_comment(schema))
    w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)


def read_csv(fh: TextIO) -> List[Dict[str, str]]:
    lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def breakdown_row(fid: str, formula: Formula, res: SolveResult, cost: CostModel) -> Dict[str, str]:
    fr = time_breakdown(res.counters, cost)
    return {
        "formula_id": fid,
        "vars": str(formula.num_vars),
        "clauses": str(formula.num_clauses),
        **{k: f"{fr[k]:.9f}" for k in ("engine", "swap", "interface", "software")},
        "swaps": str(res.counters.swaps),
        "partitions": str(res.partitions),
    }


def breakdown_sweep(
    cfg: SolverConfig,
    fix_vars: Optional[int] = None,
    fix_clauses: Optional[int] = None,
    variable_sizes: Sequence[int] = DEFAULT_VARIABLE_SIZES,
    clause_sizes: Sequence[int] = DEFAULT_CLAUSE_SIZES,
    clause_len: int = 3,
    seed: int = 1,
) -> List[Dict[str, str]]:
    """Hardware-run time fractions along one axis of the bench matrix."""
    if (fix_vars is None) == (fix_clauses is None):
        raise ValueError("give exactly one of fix_vars / fix_clauses")
    if fix_vars is not None:
        points = [(fix_vars, c) for c in clause_sizes]
    else:
        points = [(v, fix_clauses) for v in variable_sizes]
    hw_cfg = replace(cfg, backend="hw-sim")
    rows = []
    for v, c in points:
        fid = formula_id(v, c, clause_len, seed)
        formula = gen_random(v, c, clause_len, seed)
        rows.append(breakdown_row(fid, formula, solve(formula, hw_cfg), cfg.cost))
    return rows


def calibrate_software_cost(propagations: int = 1000, seed: int = 0) -> float:
    """Host nanoseconds per clause visit of the software sweep.

    Times sweep propagation on a fixed random instance until ``propagations``
    literals have been propagated.
    """
    formula = gen_random(200, 840, 3, seed)
    sweeper = _SweepPropagator(formula)
    visits = 0
    done = 0
    elapsed = 0.0
    var = 1
    while done < propagations:
        trail = AssignmentTrail(formula.num_vars)
        for v in range(var, min(var + 4, formula.num_vars + 1)):
            trail.decide(v)
        t0 = time.perf_counter()
        res = sweeper.run(trail)
        elapsed += time.perf_counter() - t0
        visits += res.clause_visits
        done += len(res.implied) + 1
        var = var % (formula.num_vars - 4) + 1
    return elapsed * 1e9 / visits
