"""Command-line entry point.

Exit codes follow the SAT-solver convention: 10 satisfiable, 20
unsatisfiable, 0 unknown (decision budget exhausted), 1 error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager
from typing import Optional, Sequence

from . import bench
from .cnf import ParseError, gen_random, parse_dimacs
from .engine import EventTrace
from .oracle import MAX_ORACLE_VARS, OracleLimitError, brute_force_model
from .partition import (
    PartitionError,
    PartitionLimits,
    dispersion_stats,
    greedy_partition,
    write_dispersion_csv,
    write_plan_csv,
)
from .perf import (
    BCP_EVENT_DEFINITION,
    REFERENCE_MATRIX,
    CostModel,
    effective_throughput,
    engine_throughput,
    render_matrix,
    render_throughput_table,
    time_breakdown,
    total_time_s,
)
from .solver import HEURISTICS, SolverConfig, Verdict, solve

EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_UNKNOWN = 0
EXIT_ERROR = 1

log = logging.getLogger("bcpaccel")


def _add_solver_flags(p: argparse.ArgumentParser, timeout_default=None) -> None:
    p.add_argument("--max-clauses", type=int, default=PartitionLimits.max_clauses)
    p.add_argument("--max-vars", type=int, default=PartitionLimits.max_vars)
    p.add_argument("--max-literals", type=int, default=PartitionLimits.max_literals_per_clause)
    p.add_argument("--clock-hz", type=float, default=None)
    for name in CostModel.field_names():
        p.add_argument(f"--cost.{name}", dest=f"cost_{name}", type=float, default=None,
                       metavar="N")
    p.add_argument("--calibrate", action="store_true",
                   help="time this host's software sweep and use it as the per-visit cost")
    p.add_argument("--heuristic", choices=sorted(HEURISTICS), default="lowest")
    p.add_argument("--timeout-decisions", type=int, default=timeout_default)
    p.add_argument("--trace", metavar="CSV", help="write the event trace here")


def _cost_from_args(args) -> CostModel:
    changes = {}
    for name in CostModel.field_names():
        value = getattr(args, f"cost_{name}")
        if value is not None:
            default = getattr(CostModel, name)
            changes[name] = int(value) if isinstance(default, int) and value.is_integer() else value
    if args.clock_hz is not None:
        changes["clock_hz"] = args.clock_hz
    if args.calibrate:
        ns = bench.calibrate_software_cost()
        log.info("calibrated software cost: %.2f ns per clause visit", ns)
        changes["software_ns_per_clause_visit"] = ns
    return CostModel(**changes)


def _config_from_args(args, backend="software", trace=None) -> SolverConfig:
    return SolverConfig(
        backend=backend,
        limits=PartitionLimits(args.max_clauses, args.max_vars, args.max_literals),
        cost=_cost_from_args(args),
        heuristic=args.heuristic,
        max_decisions=args.timeout_decisions,
        trace=trace,
    )


def _read_formula(path: str):
    if path == "-":
        return parse_dimacs(sys.stdin)
    with open(path) as fh:
        return parse_dimacs(fh)


@contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def cmd_solve(args) -> int:
    formula = _read_formula(args.path)
    trace = EventTrace() if args.trace else None
    cfg = _config_from_args(args, args.backend, trace)
    res = solve(formula, cfg)
    if trace is not None:
        with open(args.trace, "w", newline="") as fh:
            trace.write_csv(fh)
    out = sys.stdout
    if res.verdict is Verdict.SAT:
        out.write("s SATISFIABLE\n")
        lits = [v if res.model[v] else -v for v in sorted(res.model)]
        out.write("v " + " ".join(map(str, lits + [0])) + "\n")
    elif res.verdict is Verdict.UNSAT:
        out.write("s UNSATISFIABLE\n")
    else:
        out.write("s UNKNOWN\n")
    _summary(res, cfg.cost)
    return {Verdict.SAT: EXIT_SAT, Verdict.UNSAT: EXIT_UNSAT}.get(res.verdict, EXIT_UNKNOWN)


def _summary(res, cost: CostModel) -> None:
    pc = res.counters
    err = sys.stderr
    err.write(f"c backend={res.backend} verdict={res.verdict.value} decisions={pc.decisions} "
              f"backtracks={pc.backtracks} implications={pc.implications}\n")
    err.write(f"c {BCP_EVENT_DEFINITION}\n")
    err.write(f"c bcp_events={pc.bcp_events} modeled_time={total_time_s(pc, cost) * 1e6:.3f}us "
              f"wall={pc.wall_time_s:.3f}s\n")
    if res.backend == "hw-sim":
        err.write(f"c partitions={res.partitions} swaps={pc.swaps} visits={pc.partition_visits} "
                  f"engine_cycles={pc.engine_cycles} swap_cycles={pc.swap_cycles} "
                  f"interface_cycles={pc.interface_cycles}\n")
        if pc.engine_cycles:
            err.write(f"c engine_bcps={engine_throughput(pc, cost):.0f} "
                      f"effective_bcps={effective_throughput(pc, cost):.0f}\n")
    if total_time_s(pc, cost) > 0:
        parts = " ".join(f"{k}={v:.4f}" for k, v in time_breakdown(pc, cost).items())
        err.write(f"c breakdown {parts}\n")


def _bench_spec(args) -> bench.BenchSpec:
    return bench.BenchSpec(
        variable_sizes=args.vars or bench.DEFAULT_VARIABLE_SIZES,
        clause_sizes=args.clauses or bench.DEFAULT_CLAUSE_SIZES,
        clause_len=args.clause_len,
        seeds=args.seed or [1],
        backends=args.backends.split(","),
    )


def cmd_bench(args) -> int:
    spec = _bench_spec(args)
    cfg = _config_from_args(args)
    rows = bench.run_bench(spec, cfg, jobs=args.jobs)
    with _output(args.out) as fh:
        bench.write_csv(rows, bench.BENCH_COLUMNS, bench.BENCH_SCHEMA, fh)
    return 0


def cmd_breakdown(args) -> int:
    cfg = _config_from_args(args, "hw-sim")
    if args.path:
        formula = _read_formula(args.path)
        res = solve(formula, cfg)
        rows = [bench.breakdown_row(args.path, formula, res, cfg.cost)]
    else:
        if args.fix_vars is None and args.fix_clauses is None:
            raise SystemExit("breakdown needs a DIMACS path, --fix-vars or --fix-clauses")
        rows = bench.breakdown_sweep(
            cfg, args.fix_vars, args.fix_clauses,
            variable_sizes=args.vars or bench.DEFAULT_VARIABLE_SIZES,
            clause_sizes=args.clauses or bench.DEFAULT_CLAUSE_SIZES,
            clause_len=args.clause_len, seed=(args.seed or [1])[0],
        )
    with _output(args.out) as fh:
        bench.write_csv(rows, bench.BREAKDOWN_COLUMNS, bench.BREAKDOWN_SCHEMA, fh)
    return 0


def cmd_oracle(args) -> int:
    if args.path:
        formulas = [(args.path, _read_formula(args.path))]
    elif args.gen:
        v, c, k = args.gen
        seed = (args.seed or [1])[0]
        formulas = [(bench.formula_id(v, c, k, s), gen_random(v, c, k, s))
                    for s in range(seed, seed + args.count)]
    else:
        raise SystemExit("oracle needs a DIMACS path or --gen VARS CLAUSES LEN")
    agree = 0
    verdict = None
    for name, formula in formulas:
        model = brute_force_model(formula, MAX_ORACLE_VARS)
        verdict = model is not None
        line = f"{name} {'SAT' if verdict else 'UNSAT'}"
        if args.check:
            got = {b: solve(formula, SolverConfig(backend=b)).sat for b in ("software", "hw-sim")}
            ok = all(g == verdict for g in got.values())
            agree += ok
            line += " " + " ".join(f"{b}={'SAT' if g else 'UNSAT'}" for b, g in got.items())
            line += " ok" if ok else " MISMATCH"
        print(line)
    if args.check:
        print(f"agreement {agree}/{len(formulas)}")
        if agree != len(formulas):
            return EXIT_ERROR
    if len(formulas) == 1:
        return EXIT_SAT if verdict else EXIT_UNSAT
    return 0


def cmd_partition(args) -> int:
    formula = _read_formula(args.path)
    plan = greedy_partition(formula, PartitionLimits(args.max_clauses, args.max_vars, args.max_literals))
    with _output(args.out) as fh:
        write_plan_csv(plan, fh)
    if args.histogram:
        with open(args.histogram, "w", newline="") as fh:
            write_dispersion_csv(plan, fh)
    st = dispersion_stats(plan)
    sys.stderr.write(f"c partitions={len(plan)} max_dispersion={st.max} "
                     f"mean_dispersion={float(st.mean):.3f} cross_vars={st.total_cross_vars}\n")
    return 0


def cmd_report(args) -> int:
    with open(args.csv) as fh:
        rows = bench.read_csv(fh)
    cells = {}
    engine = {}
    for r in rows:
        if r["backend"] != "hw-sim":
            continue
        key = (int(r["vars"]), int(r["clauses"]))
        if r["effective_bcps"] and r["speedup"]:
            cells.setdefault(key, (float(r["effective_bcps"]), float(r["speedup"])))
        if r["engine_bcps"]:
            engine.setdefault(r["formula_id"], float(r["engine_bcps"]))
    for key in REFERENCE_MATRIX:
        cells.setdefault(key, None)
    print(render_matrix(cells, "Simulated: effective BCP/s and hw/sw speedup"))
    print()
    print(render_matrix(REFERENCE_MATRIX, "Reported FPGA measurements"))
    print()
    print(render_throughput_table(engine))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bcpaccel", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a DIMACS file")
    p.add_argument("path", help="DIMACS file or - for stdin")
    p.add_argument("--backend", choices=["software", "hw-sim"], default="hw-sim")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    def add_matrix_flags(p):
        p.add_argument("--vars", type=int, nargs="+")
        p.add_argument("--clauses", type=int, nargs="+")
        p.add_argument("--clause-len", type=int, default=3)
        p.add_argument("--seed", type=int, nargs="+")
        p.add_argument("--out", "-o", help="CSV destination (default stdout)")

    p = sub.add_parser("bench", help="run the vars x clauses benchmark matrix")
    add_matrix_flags(p)
    p.add_argument("--backends", default="software,hw-sim")
    p.add_argument("--jobs", type=int, default=1)
    _add_solver_flags(p, timeout_default=bench.DEFAULT_BENCH_DECISIONS)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("breakdown", help="execution-time breakdown of hardware runs")
    p.add_argument("path", nargs="?")
    p.add_argument("--fix-vars", type=int)
    p.add_argument("--fix-clauses", type=int)
    add_matrix_flags(p)
    _add_solver_flags(p, timeout_default=bench.DEFAULT_BENCH_DECISIONS)
    p.set_defaults(func=cmd_breakdown)

    p = sub.add_parser("oracle", help="truth-table verdict (at most 24 variables)")
    p.add_argument("path", nargs="?")
    p.add_argument("--gen", type=int, nargs=3, metavar=("VARS", "CLAUSES", "LEN"))
    p.add_argument("--seed", type=int, nargs="+")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--check", action="store_true", help="also run both solver backends")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("partition", help="dump the greedy partition plan as CSV")
    p.add_argument("path")
    p.add_argument("--max-clauses", type=int, default=PartitionLimits.max_clauses)
    p.add_argument("--max-vars", type=int, default=PartitionLimits.max_vars)
    p.add_argument("--max-literals", type=int, default=PartitionLimits.max_literals_per_clause)
    p.add_argument("--histogram", metavar="CSV")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("report", help="render a bench CSV next to the reported figures")
    p.add_argument("csv")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="c %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ParseError, PartitionError, OracleLimitError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
