"""Plain DPLL (chronological backtracking, no learning) with pluggable BCP.

Two BCP backends share one search loop:

* ``software`` -- repeated sweeps over the whole clause list until no clause
  is unit; every clause evaluation is a counted clause visit.
* ``hw-sim``   -- the simulated accelerator driven through its registers,
  one partition resident at a time, hot-swapping partitions and forwarding
  implications between them until a global fixpoint.
"""

from __future__ import annotations

import enum
import hashlib
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional

from .cnf import Formula, eval_formula, lit_var
from .engine import BcpEngine
from .interface import (
    STATUS_CONFLICT,
    STATUS_ERROR,
    STATUS_IMPLICATION,
    Command,
    RegisterInterface,
)
from .partition import PartitionLimits, PartitionPlan, PartitionStrategy, greedy_partition
from .perf import CostModel, PerfCounters


@dataclass(frozen=True)
class TrailEntry:
    literal: int
    level: int
    decision: bool = False
    flipped: bool = False
    partition: Optional[int] = None  # source partition of an implication


class AssignmentTrail:
    def __init__(self, num_vars: int):
        self.num_vars = num_vars
        self.entries: List[TrailEntry] = []
        self.values: Dict[int, TrailEntry] = {}
        self.position: Dict[int, int] = {}
        self.current_level = 0

    def __len__(self) -> int:
        return len(self.entries)

    def value(self, var: int) -> Optional[bool]:
        e = self.values.get(var)
        return None if e is None else e.literal > 0

    def assignment(self) -> Dict[int, bool]:
        return {v: e.literal > 0 for v, e in self.values.items()}

    def decide(self, literal: int, flipped: bool = False) -> TrailEntry:
        self.current_level += 1
        return self._push(TrailEntry(literal, self.current_level, True, flipped))

    def imply(self, literal: int, partition: Optional[int] = None) -> TrailEntry:
        return self._push(TrailEntry(literal, self.current_level, False, False, partition))

    def _push(self, entry: TrailEntry) -> TrailEntry:
        var = lit_var(entry.literal)
        if var in self.values:
            raise AssertionError(f"variable {var} assigned twice")
        self.values[var] = entry
        self.position[var] = len(self.entries)
        self.entries.append(entry)
        return entry

    def truncate(self, level: int) -> int:
        """Remove every entry above ``level``; returns how many were removed."""
        n = 0
        while self.entries and self.entries[-1].level > level:
            var = lit_var(self.entries.pop().literal)
            del self.values[var]
            del self.position[var]
            n += 1
        self.current_level = min(self.current_level, level)
        return n


Heuristic = Callable[[AssignmentTrail, Formula], Optional[int]]


def lowest_index_positive(trail: AssignmentTrail, formula: Formula) -> Optional[int]:
    for v in range(1, formula.num_vars + 1):
        if v not in trail.values:
            return v
    return None


def lowest_index_negative(trail: AssignmentTrail, formula: Formula) -> Optional[int]:
    v = lowest_index_positive(trail, formula)
    return None if v is None else -v


HEURISTICS: Dict[str, Heuristic] = {
    "lowest": lowest_index_positive,
    "lowest-neg": lowest_index_negative,
}


def decide(trail: AssignmentTrail, formula: Formula, heuristic: Heuristic = lowest_index_positive):
    """Next decision literal, or None when every variable is assigned."""
    return heuristic(trail, formula)


class BcpResult(NamedTuple):
    conflict: bool
    implied: tuple
    clause_visits: int


def software_bcp(trail: AssignmentTrail, formula: Formula) -> BcpResult:
    """Sweep all clauses, assigning units as found, until a sweep adds nothing.

    Implications are appended to ``trail`` at its current level.
    """
    return _SweepPropagator(formula).run(trail)


class _SweepPropagator:
    def __init__(self, formula: Formula):
        n = formula.num_vars
        self.size = 2 * n + 1
        # index by signed literal; negative indices wrap to the upper half
        self.clauses = [c.literals for c in formula.clauses if not c.tautological]
        self.skipped = formula.num_clauses - len(self.clauses)

    def run(self, trail: AssignmentTrail) -> BcpResult:
        val = [0] * self.size
        for v, e in trail.values.items():
            s = 1 if e.literal > 0 else -1
            val[v] = s
            val[-v] = -s
        implied = []
        visits = 0
        changed = True
        clauses = self.clauses
        while changed:
            changed = False
            visits += len(clauses) + self.skipped
            for lits in clauses:
                free = 0
                n_free = 0
                for lit in lits:
                    x = val[lit]
                    if x > 0:
                        break
                    if x == 0:
                        n_free += 1
                        free = lit
                else:
                    if n_free == 0:
                        return BcpResult(True, tuple(implied), visits)
                    if n_free == 1:
                        val[free] = 1
                        val[-free] = -1
                        trail.imply(free)
                        implied.append(free)
                        changed = True
        return BcpResult(False, tuple(implied), visits)


class Backend:
    name = "abstract"

    def __init__(self, formula: Formula, cost: CostModel, counters: PerfCounters):
        self.formula = formula
        self.cost = cost
        self.counters = counters

    def propagate(self, trail: AssignmentTrail, new_literal: Optional[int]) -> bool:
        """Run BCP after ``new_literal`` joined the trail (None: initial pass).

        Returns True on conflict.
        """
        raise NotImplementedError

    def on_backtrack(self, trail: AssignmentTrail, level: int) -> None:
        pass

    def finish(self) -> None:
        pass


class SoftwareBackend(Backend):
    name = "software"

    def __init__(self, formula, cost, counters):
        super().__init__(formula, cost, counters)
        self._sweeper = _SweepPropagator(formula)

    def propagate(self, trail, new_literal):
        res = self._sweeper.run(trail)
        pc = self.counters
        pc.bcp_events += len(res.implied) + (new_literal is not None)
        pc.implications += len(res.implied)
        pc.charge_software(self.cost, clause_visits=res.clause_visits, trail_ops=len(res.implied))
        return res.conflict


class HardwareBackend(Backend):
    """BCP on the simulated accelerator, one resident partition at a time."""

    name = "hw-sim"

    def __init__(
        self,
        formula: Formula,
        cost: CostModel,
        counters: PerfCounters,
        limits: PartitionLimits = PartitionLimits(),
        partitioner: PartitionStrategy = greedy_partition,
        trace=None,
        check_coherence: bool = False,
    ):
        super().__init__(formula, cost, counters)
        self.plan: PartitionPlan = partitioner(formula, limits)
        self.parts_of = self.plan.partitions_of()
        self.engine = BcpEngine(
            limits.max_clauses, limits.max_literals_per_clause, cost, trace, check_coherence
        )
        self.port = RegisterInterface(self.engine, trace)
        self.resident: Optional[int] = None
        self.synced = 0  # trail prefix already mirrored in the resident partition

    def _round_robin(self, ids, after: Optional[int]):
        n = len(self.plan)
        start = -1 if after is None else after
        return sorted(ids, key=lambda pid: (pid - start - 1) % n)

    def _swap_in(self, pid: int) -> None:
        clauses = self.formula.clauses
        self.port.load_partition(
            pid, [clauses[i].literals for i in self.plan.partitions[pid].clause_indices]
        )
        self.resident = pid
        self.synced = 0
        self.counters.swaps += 1

    def propagate(self, trail, new_literal):
        return self.propagate_all_partitions(trail, new_literal)

    def propagate_all_partitions(self, trail: AssignmentTrail, new_literal: Optional[int]) -> bool:
        pc = self.counters
        if not self.plan.partitions:
            return False
        if new_literal is None:
            seeds = [p.id for p in self.plan.partitions]
        else:
            seeds = list(self.parts_of.get(lit_var(new_literal), ()))
        initial = new_literal is None
        queue = deque(self._round_robin(seeds, self.resident))
        queued = set(queue)
        port = self.port
        while queue:
            pid = queue.popleft()
            queued.discard(pid)
            local = self.plan.partitions[pid].local_vars
            if pid != self.resident:
                self._swap_in(pid)
                # look up each local variable instead of walking the trail
                pos = trail.position
                relevant = [trail.entries[i] for i in sorted(pos[v] for v in local if v in pos)]
                pc.charge_software(self.cost, trail_ops=len(local))
            else:
                scanned = trail.entries[self.synced:]
                relevant = [e for e in scanned if lit_var(e.literal) in local]
                pc.charge_software(self.cost, trail_ops=len(scanned))
            if not relevant and not initial:
                self.synced = len(trail)
                continue
            pc.partition_visits += 1
            trigger = None
            if relevant and relevant[-1].level == trail.current_level:
                trigger = relevant.pop().literal
            for e in relevant:
                port.write_command(Command.broadcast(e.literal, e.level))
            self.synced = len(trail)
            port.write_command(Command.start(trigger, trail.current_level))
            status = port.wait_done()
            if status & STATUS_ERROR:
                raise RuntimeError("accelerator reported a protocol error")
            if status & STATUS_CONFLICT:
                return True
            new_vars = []
            while port.regs.status & STATUS_IMPLICATION:
                lit = port.read_implication()
                trail.imply(lit, pid)
                new_vars.append(lit_var(lit))
            self.synced = len(trail)
            pc.implications += len(new_vars)
            pc.charge_software(self.cost, trail_ops=len(new_vars))
            if new_vars:
                targets = set()
                for v in new_vars:
                    targets.update(self.parts_of.get(v, ()))
                targets.discard(pid)
                targets -= queued
                for q in self._round_robin(targets, pid):
                    queue.append(q)
                    queued.add(q)
        return False

    def on_backtrack(self, trail, level):
        if self.resident is not None:
            self.port.write_command(Command.clear_above(level))
        self.synced = min(self.synced, len(trail))

    def finish(self):
        pc = self.counters
        st = self.engine.state
        pc.bcp_events = st.bcp_events
        pc.engine_cycles = st.stage_cycles
        pc.swap_cycles = st.load_cycles + self.port.swap_cycles
        pc.interface_cycles = self.port.interface_cycles


class Verdict(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    TIMEOUT = "TIMEOUT"


@dataclass
class SolveResult:
    verdict: Verdict
    model: Optional[Dict[int, bool]]
    counters: PerfCounters
    backend: str
    partitions: int = 0

    @property
    def sat(self) -> bool:
        return self.verdict is Verdict.SAT


@dataclass
class SolverConfig:
    backend: str = "software"
    limits: PartitionLimits = field(default_factory=PartitionLimits)
    cost: CostModel = field(default_factory=CostModel)
    heuristic: str = "lowest"
    max_decisions: Optional[int] = None
    partitioner: PartitionStrategy = greedy_partition
    trace: Optional[Callable] = None
    check_coherence: bool = False


def make_backend(formula: Formula, cfg: SolverConfig, counters: PerfCounters) -> Backend:
    if cfg.backend == "software":
        return SoftwareBackend(formula, cfg.cost, counters)
    if cfg.backend == "hw-sim":
        return HardwareBackend(
            formula, cfg.cost, counters, cfg.limits, cfg.partitioner, cfg.trace, cfg.check_coherence
        )
    raise ValueError(f"unknown backend {cfg.backend!r}")


class Retry(NamedTuple):
    literal: int


def backtrack(trail: AssignmentTrail, backend: Backend) -> Optional[Retry]:
    """Undo to the latest decision whose other polarity is untried.

    Returns the flipped literal (already on the trail at that level) or
    None when every decision has been tried both ways.
    """
    target = None
    for e in reversed(trail.entries):
        if e.decision and not e.flipped:
            target = e
            break
    if target is None:
        return None
    removed = trail.truncate(target.level - 1)
    backend.counters.charge_software(backend.cost, trail_ops=removed)
    backend.on_backtrack(trail, target.level - 1)
    flipped = -target.literal
    trail.decide(flipped, flipped=True)
    return Retry(flipped)


def solve(formula: Formula, cfg: Optional[SolverConfig] = None) -> SolveResult:
    cfg = cfg or SolverConfig()
    heuristic = HEURISTICS[cfg.heuristic] if isinstance(cfg.heuristic, str) else cfg.heuristic
    pc = PerfCounters()
    t0 = time.perf_counter()
    digest = hashlib.sha256()

    def done(verdict, model=None, backend=None):
        if backend is not None:
            backend.finish()
        pc.decision_trace = digest.hexdigest()[:16]
        pc.wall_time_s = time.perf_counter() - t0
        parts = len(backend.plan) if isinstance(backend, HardwareBackend) else 0
        return SolveResult(verdict, model, pc, cfg.backend, parts)

    if formula.has_empty_clause:
        return done(Verdict.UNSAT)
    backend = make_backend(formula, cfg, pc)
    trail = AssignmentTrail(formula.num_vars)
    if backend.propagate(trail, None):
        return done(Verdict.UNSAT, backend=backend)
    while True:
        lit = decide(trail, formula, heuristic)
        if lit is None:
            model = trail.assignment()
            if not eval_formula(formula, model):
                raise AssertionError("propagation reached a non-model")
            return done(Verdict.SAT, model, backend)
        if cfg.max_decisions is not None and pc.decisions >= cfg.max_decisions:
            return done(Verdict.TIMEOUT, backend=backend)
        pc.decisions += 1
        digest.update(b"%d;" % lit)
        trail.decide(lit)
        pc.charge_software(cfg.cost, trail_ops=1)
        while backend.propagate(trail, lit):
            retry = backtrack(trail, backend)
            if retry is None:
                return done(Verdict.UNSAT, backend=backend)
            pc.backtracks += 1
            lit = retry.literal
            digest.update(b"~%d;" % lit)
            pc.charge_software(cfg.cost, trail_ops=1)
