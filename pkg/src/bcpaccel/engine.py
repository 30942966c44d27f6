"""Cycle-stepped model of the BCP engine.

The engine holds one partition at a time: every clause sits in its own
clause processor together with a private copy of the assignments of that
clause's variables.  A broadcast updates all processors in the same cycle,
the evaluate stage collects unit/falsified status from the whole array and
a fixed-priority selector (lowest slot wins) picks the next implication to
broadcast.  There is no separate implication-conflict detector: a conflict
shows up at evaluation time, either as a falsified clause or as two unit
clauses forcing opposite values.
"""

from __future__ import annotations

import enum
from bisect import insort
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional

from .cnf import Formula, lit_var
from .partition import Partition
from .perf import CostModel


class EngineFault(RuntimeError):
    """The engine was driven in a way the hardware does not allow."""


class ControlState(str, enum.Enum):
    IDLE = "Idle"
    LOAD_CLAUSES = "LoadClauses"
    CLEAR_ASSIGNMENTS = "ClearAssignments"
    BROADCAST = "Broadcast"
    EVALUATE = "Evaluate"
    SELECT_IMPLICATION = "SelectImplication"
    REPORT_DONE = "ReportDone"
    REPORT_CONFLICT = "ReportConflict"


S = ControlState

TRANSITIONS = frozenset({
    (S.IDLE, S.LOAD_CLAUSES),
    (S.IDLE, S.CLEAR_ASSIGNMENTS),
    (S.IDLE, S.BROADCAST),
    (S.IDLE, S.EVALUATE),            # start without a trigger literal
    (S.LOAD_CLAUSES, S.IDLE),
    (S.CLEAR_ASSIGNMENTS, S.IDLE),
    (S.BROADCAST, S.EVALUATE),
    (S.EVALUATE, S.SELECT_IMPLICATION),
    (S.EVALUATE, S.REPORT_DONE),
    (S.EVALUATE, S.REPORT_CONFLICT),
    (S.EVALUATE, S.IDLE),            # broadcast-only (replay) command
    (S.SELECT_IMPLICATION, S.BROADCAST),
    (S.REPORT_DONE, S.IDLE),
    (S.REPORT_CONFLICT, S.IDLE),
})


class SlotStatus(str, enum.Enum):
    SATISFIED = "satisfied"
    FALSIFIED = "falsified"
    UNIT = "unit"
    UNRESOLVED = "unresolved"
    EMPTY = "empty"


@dataclass
class ClauseProcessor:
    slot_id: int
    capacity: int
    literals: tuple = ()
    # var -> (value, decision level)
    local_assignment: Dict[int, tuple] = field(default_factory=dict)
    status: SlotStatus = SlotStatus.EMPTY
    forced: Optional[int] = None

    @property
    def occupancy(self) -> int:
        return len(self.literals)

    def refresh(self) -> None:
        lits = self.literals
        if not lits:
            self.status, self.forced = SlotStatus.EMPTY, None
            return
        local = self.local_assignment
        n_free = 0
        free = None
        seen = set()
        for lit in lits:
            if -lit in seen:
                # x or not-x can never be falsified or unit
                self.status, self.forced = SlotStatus.SATISFIED, None
                return
            seen.add(lit)
        for lit in lits:
            entry = local.get(lit if lit > 0 else -lit)
            if entry is None:
                n_free += 1
                free = lit
            elif entry[0] == (lit > 0):
                self.status, self.forced = SlotStatus.SATISFIED, None
                return
        if n_free == 0:
            self.status, self.forced = SlotStatus.FALSIFIED, None
        elif n_free == 1:
            self.status, self.forced = SlotStatus.UNIT, free
        else:
            self.status, self.forced = SlotStatus.UNRESOLVED, None


@dataclass(frozen=True)
class Implication:
    literal: int
    source_slot: int
    decision_level: int


@dataclass
class EngineState:
    processors: List[ClauseProcessor]
    control: ControlState = ControlState.IDLE
    pending_implications: List[Implication] = field(default_factory=list)
    conflict_flag: bool = False
    loaded_partition: Optional[int] = None
    run_level: int = 0
    cycle_count: int = 0
    # cycle_count split: broadcast/evaluate/select/clear vs clause loading
    stage_cycles: int = 0
    load_cycles: int = 0
    bcp_events: int = 0

    @classmethod
    def fresh(cls, num_slots: int = 224, slot_capacity: int = 16) -> "EngineState":
        return cls([ClauseProcessor(i, slot_capacity) for i in range(num_slots)])


class BcpOutcome(NamedTuple):
    conflict: bool
    implied: tuple


TraceHook = Callable[[int, str, str, Optional[int]], None]


class BcpEngine:
    """Drives an :class:`EngineState` through the control-unit state machine."""

    def __init__(
        self,
        num_slots: int = 224,
        slot_capacity: int = 16,
        cost: CostModel = CostModel(),
        trace: Optional[TraceHook] = None,
        check_coherence: bool = False,
    ):
        self.state = EngineState.fresh(num_slots, slot_capacity)
        self.cost = cost
        self.trace = trace
        self.trace_offset = 0
        self.check_coherence = check_coherence
        self._slots_of: Dict[int, List[int]] = {}
        self._live: List[int] = []  # occupied slots, ascending

    @property
    def num_slots(self) -> int:
        return len(self.state.processors)

    # -- bookkeeping -------------------------------------------------------

    def _goto(self, new: ControlState, action: str, slot: Optional[int] = None, detail=None) -> None:
        old = self.state.control
        if old is not new and (old, new) not in TRANSITIONS:
            raise EngineFault(f"illegal transition {old.value} -> {new.value}")
        self.state.control = new
        if self.trace is not None:
            if detail is not None:
                action = f"{action} {detail}"
            self.trace(self.state.cycle_count + self.trace_offset, new.value, action, slot)

    def _charge(self, cycles: int, load: bool = False) -> None:
        self.state.cycle_count += cycles
        if load:
            self.state.load_cycles += cycles
        else:
            self.state.stage_cycles += cycles

    def _acknowledge(self) -> None:
        if self.state.control in (S.REPORT_DONE, S.REPORT_CONFLICT):
            self._goto(S.IDLE, "ack")
        elif self.state.control is not S.IDLE:
            raise EngineFault(f"engine busy in {self.state.control.value}")

    def _after_step(self) -> None:
        if self.check_coherence:
            self.assert_coherent()

    def assert_coherent(self) -> None:
        from .cnf import Clause, eval_clause

        for p in self.state.processors:
            if not p.literals:
                assert p.status is SlotStatus.EMPTY, p
                continue
            assignment = {v: val for v, (val, _) in p.local_assignment.items()}
            status, lit = eval_clause(Clause(p.literals), assignment)
            assert status.value == p.status.value, (p, status)
            assert lit == p.forced, (p, lit)

    # -- loading -----------------------------------------------------------

    def begin_load(self, partition_id: int) -> None:
        """Wipe every processor and start loading a new partition."""
        self._acknowledge()
        self._goto(S.LOAD_CLAUSES, "begin", None, partition_id)
        st = self.state
        for p in st.processors:
            if p.literals or p.local_assignment:
                p.literals = ()
                p.local_assignment = {}
                p.status, p.forced = SlotStatus.EMPTY, None
        st.pending_implications = []
        st.conflict_flag = False
        st.loaded_partition = partition_id
        self._slots_of = {}
        self._live = []
        self._goto(S.IDLE, "loaded")

    def check_load(self, slot: int, literal: int) -> None:
        if not 0 <= slot < len(self.state.processors):
            raise EngineFault(f"slot {slot} out of range")
        if literal == 0:
            raise EngineFault("literal 0 is not a literal")
        proc = self.state.processors[slot]
        if len(proc.literals) >= proc.capacity:
            raise EngineFault(f"slot {slot} is full ({proc.capacity} literals)")
        if self.state.loaded_partition is None:
            raise EngineFault("no partition load in progress")

    def _place(self, slot: int, literal: int) -> None:
        proc = self.state.processors[slot]
        if literal in proc.literals:
            return
        if not proc.literals:
            insort(self._live, slot)
        var = literal if literal > 0 else -literal
        if -literal not in proc.literals:
            self._slots_of.setdefault(var, []).append(slot)
        proc.literals = proc.literals + (literal,)

    def load_literal(self, slot: int, literal: int) -> None:
        """Append one literal word to ``slot`` (one LOAD_CLAUSE transaction)."""
        self.check_load(slot, literal)
        self._acknowledge()
        self._goto(S.LOAD_CLAUSES, "load", slot, literal)
        self._place(slot, literal)
        self.state.processors[slot].refresh()
        self._charge(self.cost.cycles_load_per_literal, load=True)
        self._goto(S.IDLE, "loaded", slot)

    def load_clauses(self, partition_id: int, clauses) -> None:
        """Load whole clauses into slots 0.. in order.

        Same resulting state, cycle charge and trace as :meth:`begin_load`
        followed by :meth:`load_literal` for every literal.
        """
        procs = self.state.processors
        if len(clauses) > len(procs):
            raise EngineFault(f"partition has {len(clauses)} clauses for {len(procs)} slots")
        for slot, lits in enumerate(clauses):
            if not lits:
                raise EngineFault(f"clause for slot {slot} is empty")
            if len(lits) > procs[slot].capacity:
                raise EngineFault(f"clause for slot {slot} exceeds slot capacity")
            if 0 in lits:
                raise EngineFault("literal 0 is not a literal")
        if self.trace is not None:
            self.begin_load(partition_id)
            for slot, lits in enumerate(clauses):
                for lit in lits:
                    self.load_literal(slot, lit)
            return
        self.begin_load(partition_id)
        words = 0
        for slot, lits in enumerate(clauses):
            for lit in lits:
                self._place(slot, lit)
            words += len(lits)
            procs[slot].refresh()
        self._charge(words * self.cost.cycles_load_per_literal, load=True)

    def load_partition(self, formula: Formula, partition: Partition) -> None:
        for i in partition.clause_indices:
            if formula.clauses[i].is_empty:
                raise EngineFault(f"clause {i} is empty")
        self.load_clauses(
            partition.id, [formula.clauses[i].literals for i in partition.clause_indices]
        )
        self._after_step()

    # -- propagation -------------------------------------------------------

    def local_value(self, var: int) -> Optional[bool]:
        slots = self._slots_of.get(var)
        if not slots:
            return None
        entry = self.state.processors[slots[0]].local_assignment.get(var)
        return None if entry is None else entry[0]

    def check_broadcast(self, literal: int) -> None:
        if literal == 0:
            raise EngineFault("literal 0 is not a literal")
        if self.state.conflict_flag:
            raise EngineFault("engine holds a conflict; clear assignments first")
        current = self.local_value(lit_var(literal))
        if current is not None and current != (literal > 0):
            raise EngineFault(f"variable {lit_var(literal)} already assigned the opposite value")

    def broadcast(self, literal: int, level: int) -> None:
        """Write ``literal`` into every processor's local copy (one cycle)."""
        self.check_broadcast(literal)
        if self.state.control is not S.BROADCAST:
            self._acknowledge()
        self._goto(S.BROADCAST, "broadcast", None, (literal, level))
        var = lit_var(literal)
        entry = (literal > 0, level)
        procs = self.state.processors
        for slot in self._slots_of.get(var, ()):
            p = procs[slot]
            if var not in p.local_assignment:
                p.local_assignment[var] = entry
                p.refresh()
        self.state.bcp_events += 1
        self._charge(self.cost.cycles_broadcast)
        self._goto(S.EVALUATE, "broadcast-done")
        self._after_step()

    def replay(self, literal: int, level: int) -> None:
        """Broadcast without evaluating; used to restore assignments after a swap."""
        self.broadcast(literal, level)
        self._goto(S.IDLE, "deferred")

    def evaluate(self) -> None:
        st = self.state
        if st.control is not S.EVALUATE:
            raise EngineFault(f"evaluate from {st.control.value}")
        procs = st.processors
        pending: List[Implication] = []
        forced: Dict[int, int] = {}
        conflict = False
        for slot in self._live:
            p = procs[slot]
            if p.status is SlotStatus.FALSIFIED:
                conflict = True
            elif p.status is SlotStatus.UNIT:
                lit = p.forced
                prior = forced.get(lit_var(lit))
                if prior is None:
                    forced[lit_var(lit)] = lit
                    pending.append(Implication(lit, slot, st.run_level))
                elif prior != lit:
                    conflict = True
        st.pending_implications = pending
        st.conflict_flag = conflict
        self._charge(self.cost.cycles_evaluate)
        if conflict:
            self._goto(S.REPORT_CONFLICT, "conflict")
        elif pending:
            self._goto(S.SELECT_IMPLICATION, "pending", None, len(pending))
        else:
            self._goto(S.REPORT_DONE, "done")

    def select_implication(self) -> Implication:
        st = self.state
        if st.control is not S.SELECT_IMPLICATION:
            raise EngineFault(f"select from {st.control.value}")
        if not st.pending_implications or st.conflict_flag:
            raise EngineFault("nothing to select")
        # pending is kept in slot order, so the head is the lowest slot
        chosen = st.pending_implications.pop(0)
        self._charge(self.cost.cycles_select)
        self._goto(S.BROADCAST, "select", chosen.source_slot, chosen.literal)
        return chosen

    def run_bcp(self, trigger: Optional[int], level: int) -> BcpOutcome:
        """Propagate ``trigger`` (or just the current assignments) to quiescence."""
        st = self.state
        if st.loaded_partition is None:
            raise EngineFault("no partition loaded")
        if trigger is not None:
            self.check_broadcast(trigger)
        self._acknowledge()
        st.run_level = level
        if trigger is not None:
            self.broadcast(trigger, level)
        else:
            self._goto(S.EVALUATE, "start")
        implied = []
        while True:
            self.evaluate()
            if st.control is S.REPORT_CONFLICT:
                return BcpOutcome(True, tuple(implied))
            if st.control is S.REPORT_DONE:
                return BcpOutcome(False, tuple(implied))
            chosen = self.select_implication()
            implied.append(chosen)
            self.broadcast(chosen.literal, level)

    def clear_above(self, level: int) -> None:
        """Forget every local assignment made above decision ``level``."""
        st = self.state
        if st.control not in (S.IDLE, S.REPORT_DONE, S.REPORT_CONFLICT):
            self._acknowledge()
        if st.control is not S.IDLE:
            self._goto(S.IDLE, "ack")
        self._goto(S.CLEAR_ASSIGNMENTS, "clear-above", None, level)
        for slot in self._live:
            p = st.processors[slot]
            stale = [v for v, (_, lvl) in p.local_assignment.items() if lvl > level]
            if stale:
                for v in stale:
                    del p.local_assignment[v]
                p.refresh()
        st.pending_implications = []
        st.conflict_flag = False
        self._charge(self.cost.cycles_broadcast)
        self._goto(S.IDLE, "cleared")
        self._after_step()


class EventTrace:
    """Collects ``(cycle, state, action, slot)`` rows from engine and bus."""

    def __init__(self):
        self.rows: List[tuple] = []

    def __call__(self, cycle: int, state: str, action: str, slot: Optional[int]) -> None:
        self.rows.append((cycle, state, action, slot))

    def write_csv(self, fh) -> None:
        import csv

        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cycle", "state", "action", "slot"])
        for cycle, state, action, slot in self.rows:
            w.writerow([cycle, state, action, "" if slot is None else slot])
