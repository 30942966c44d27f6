"""Register-level model of the processor <-> accelerator link.

Wire ABI (all registers 32 bit):

``command``  bits 0..7 opcode, bits 8..31 argument (slot, level or
             ``BEGIN_PARTITION``)
``data``     operand; literals are packed as ``impl_out`` below
``status``   bit 0 done, bit 1 conflict, bit 2 implication available,
             bit 3 sticky error
``impl_out`` bits 0..23 variable id, bit 24 polarity (1 = positive),
             bits 25..31 reserved (zero)

========  ==================  =============================================
opcode    name                effect
========  ==================  =============================================
0x0       NOP                 none
0x1       LOAD_CLAUSE         arg=slot: append literal ``data`` to slot;
                              arg=BEGIN_PARTITION: wipe array, ``data`` is
                              the partition id
0x2       BROADCAST_LITERAL   assign ``data`` at level ``arg`` (no evaluation)
0x3       CLEAR_ABOVE         drop assignments above level ``arg``
0x4       START_BCP           propagate ``data`` (0 = no trigger) at level
                              ``arg``; completion is observed by polling
0x5       READ_IMPLICATION    drop the head of the implication queue
========  ==================  =============================================

A command write (command + data pair) is one bus transaction.  Reading
``impl_out`` through :meth:`RegisterInterface.read_implication` pops the
implication queue.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .cnf import lit_var
from .engine import BcpEngine, ControlState, EngineFault

STATUS_DONE = 1 << 0
STATUS_CONFLICT = 1 << 1
STATUS_IMPLICATION = 1 << 2
STATUS_ERROR = 1 << 3

VAR_BITS = 24
VAR_MASK = (1 << VAR_BITS) - 1
POLARITY_BIT = 1 << 24
RESERVED_MASK = 0xFFFFFFFF & ~(VAR_MASK | POLARITY_BIT)
ARG_MASK = 0xFFFFFF
BEGIN_PARTITION = ARG_MASK
MAX_VAR = VAR_MASK


class Opcode(enum.IntEnum):
    NOP = 0x0
    LOAD_CLAUSE = 0x1
    BROADCAST_LITERAL = 0x2
    CLEAR_ABOVE = 0x3
    START_BCP = 0x4
    READ_IMPLICATION = 0x5


class ProtocolError(RuntimeError):
    """The driver broke the register protocol."""


def pack_literal(lit: int) -> int:
    var = lit_var(lit)
    if not 1 <= var <= MAX_VAR:
        raise ValueError(f"variable {var} not representable in {VAR_BITS} bits")
    return var | (POLARITY_BIT if lit > 0 else 0)


def unpack_literal(word: int) -> int:
    if word & RESERVED_MASK or not 0 <= word <= 0xFFFFFFFF:
        raise ValueError(f"reserved bits set in {word:#010x}")
    var = word & VAR_MASK
    if var == 0:
        raise ValueError("variable id 0 is not valid")
    return var if word & POLARITY_BIT else -var


@dataclass(frozen=True)
class Command:
    opcode: Opcode
    operand: int = 0
    arg: int = 0

    @property
    def word(self) -> int:
        return (int(self.opcode) & 0xFF) | ((self.arg & ARG_MASK) << 8)

    @classmethod
    def load_begin(cls, partition_id: int) -> "Command":
        return cls(Opcode.LOAD_CLAUSE, partition_id, BEGIN_PARTITION)

    @classmethod
    def load(cls, slot: int, lit: int) -> "Command":
        return cls(Opcode.LOAD_CLAUSE, pack_literal(lit), slot)

    @classmethod
    def broadcast(cls, lit: int, level: int) -> "Command":
        return cls(Opcode.BROADCAST_LITERAL, pack_literal(lit), level)

    @classmethod
    def clear_above(cls, level: int) -> "Command":
        return cls(Opcode.CLEAR_ABOVE, 0, level)

    @classmethod
    def start(cls, trigger: Optional[int], level: int) -> "Command":
        return cls(Opcode.START_BCP, 0 if trigger is None else pack_literal(trigger), level)


@dataclass
class RegisterFile:
    command: int = 0
    data: int = 0
    status: int = 0
    impl_out: int = 0


def polls_needed(run_cycles: int, read_cycles: int, interval_cycles: int) -> int:
    """Polls until a run of ``run_cycles`` is observed complete.

    Poll ``k`` samples status ``k*read + (k-1)*interval`` cycles after the
    start command; at least one poll is always made.  Free polling
    (zero read and interval cost) sees completion on the first poll.
    """
    if read_cycles + interval_cycles == 0:
        return 1
    k = 1
    while k * read_cycles + (k - 1) * interval_cycles < run_cycles:
        k += 1
    return k


class RegisterInterface:
    """Owns a register file and the engine behind it.

    Cycle buckets: ``swap_cycles`` collects bus time of LOAD_CLAUSE writes,
    ``interface_cycles`` every other write, every read, and polling time
    not hidden behind engine execution.
    """

    def __init__(self, engine: BcpEngine, trace=None):
        self.engine = engine
        self.cost = engine.cost
        self.regs = RegisterFile()
        self.trace = trace
        self.swap_cycles = 0
        self.interface_cycles = 0
        self.polls = 0
        self.writes = 0
        self.reads = 0
        self._queue: deque = deque()
        self._run_cycles = 0
        self._elapsed: Optional[int] = None
        self._run_polls = 0
        self._final_status = 0

    @property
    def now(self) -> int:
        return self.engine.state.cycle_count + self.swap_cycles + self.interface_cycles

    def _log(self, action: str, slot: Optional[int] = None) -> None:
        if self.trace is not None:
            self.trace(self.now, "bus", action, slot)
        self.engine.trace_offset = self.swap_cycles + self.interface_cycles

    def reset(self) -> None:
        self.regs = RegisterFile()
        self._queue.clear()
        self._elapsed = None

    # -- writes ------------------------------------------------------------

    def write_command(self, cmd: Command) -> None:
        self.writes += 1
        if cmd.opcode == Opcode.LOAD_CLAUSE:
            self.swap_cycles += self.cost.axi_write_cycles
        else:
            self.interface_cycles += self.cost.axi_write_cycles
        self.regs.command = cmd.word
        self.regs.data = cmd.operand & 0xFFFFFFFF
        if self.trace is not None:
            self._log(f"write {Opcode(cmd.opcode).name} arg={cmd.arg} data={cmd.operand:#x}")
        # done/conflict only live until the next command
        self.regs.status &= ~(STATUS_DONE | STATUS_CONFLICT)
        self._elapsed = None
        try:
            self._dispatch(cmd)
        except (EngineFault, ValueError) as exc:
            self.regs.status |= STATUS_ERROR
            self._log(f"error: {exc}")

    def _dispatch(self, cmd: Command) -> None:
        eng = self.engine
        op = cmd.opcode
        if op == Opcode.NOP:
            return
        if op == Opcode.LOAD_CLAUSE:
            if cmd.arg == BEGIN_PARTITION:
                eng.begin_load(cmd.operand)
                self._drop_queue()
            else:
                eng.load_literal(cmd.arg, unpack_literal(cmd.operand))
        elif op == Opcode.BROADCAST_LITERAL:
            lit = unpack_literal(cmd.operand)
            eng.check_broadcast(lit)
            self._drop_queue()
            eng.replay(lit, cmd.arg)
        elif op == Opcode.CLEAR_ABOVE:
            eng.clear_above(cmd.arg)
            self._drop_queue()
        elif op == Opcode.START_BCP:
            trigger = None if cmd.operand == 0 else unpack_literal(cmd.operand)
            if eng.state.loaded_partition is None:
                raise EngineFault("no partition loaded")
            if trigger is not None:
                eng.check_broadcast(trigger)
            self._drop_queue()
            before = eng.state.cycle_count
            outcome = eng.run_bcp(trigger, cmd.arg)
            self._run_cycles = eng.state.cycle_count - before
            self._elapsed = 0
            self._run_polls = 0
            if outcome.conflict:
                self._final_status = STATUS_CONFLICT
            else:
                self._queue.extend(outcome.implied)
                self._final_status = STATUS_DONE
        elif op == Opcode.READ_IMPLICATION:
            if not self._queue:
                raise EngineFault("implication queue empty")
            self._queue.popleft()
            self._expose_head()
        else:  # pragma: no cover - IntEnum guards the value
            raise ValueError(f"unknown opcode {op}")

    def _drop_queue(self) -> None:
        self._queue.clear()
        self._expose_head()

    def _expose_head(self) -> None:
        if self._queue:
            self.regs.impl_out = pack_literal(self._queue[0].literal)
            self.regs.status |= STATUS_IMPLICATION
        else:
            self.regs.impl_out = 0
            self.regs.status &= ~STATUS_IMPLICATION

    def load_partition(self, partition_id: int, clauses) -> None:
        """Issue the LOAD_CLAUSE stream for a whole partition.

        Equivalent to writing ``Command.load_begin`` and then
        ``Command.load(slot, lit)`` for every literal; when nothing is being
        traced and every word is well formed the stream is applied in one go.
        """
        if self.trace is None and self._loadable(clauses):
            eng = self.engine
            words = 1 + sum(len(c) for c in clauses)
            self.writes += words
            self.swap_cycles += words * self.cost.axi_write_cycles
            eng.load_clauses(partition_id, clauses)
            last_slot = len(clauses) - 1
            if last_slot >= 0:
                last = Command.load(last_slot, clauses[-1][-1])
            else:
                last = Command.load_begin(partition_id)
            self.regs.command = last.word
            self.regs.data = last.operand
            self.regs.status &= ~(STATUS_DONE | STATUS_CONFLICT)
            self._elapsed = None
            self._drop_queue()
            return
        self.write_command(Command.load_begin(partition_id))
        for slot, lits in enumerate(clauses):
            for lit in lits:
                self.write_command(Command.load(slot, lit))

    def _loadable(self, clauses) -> bool:
        eng = self.engine
        if eng.state.control not in (ControlState.IDLE, ControlState.REPORT_DONE, ControlState.REPORT_CONFLICT):
            return False
        if not 0 <= len(clauses) <= eng.num_slots:
            return False
        procs = eng.state.processors
        for slot, lits in enumerate(clauses):
            if not lits or len(lits) > procs[slot].capacity:
                return False
            for lit in lits:
                if lit == 0 or abs(lit) > MAX_VAR:
                    return False
        return True

    # -- reads -------------------------------------------------------------

    def poll_status(self) -> int:
        self.polls += 1
        self.reads += 1
        cm = self.cost
        if self._elapsed is None:
            self.interface_cycles += cm.axi_read_cycles
        else:
            # a run is in flight; poll time overlaps engine execution
            self._run_polls += 1
            k = self._run_polls
            self._elapsed = k * cm.axi_read_cycles + (k - 1) * cm.poll_interval_cycles
            free = cm.axi_read_cycles + cm.poll_interval_cycles == 0
            if self._elapsed >= self._run_cycles or free:
                self.interface_cycles += max(0, self._elapsed - self._run_cycles)
                self._elapsed = None
                self.regs.status |= self._final_status
                self._expose_head()
        if self.trace is not None:
            self._log(f"poll status={self.regs.status:#x}")
        return self.regs.status

    def read_implication(self) -> int:
        """Read and pop ``impl_out``; returns the packed literal as an int literal."""
        if not self.regs.status & STATUS_IMPLICATION:
            raise ProtocolError("read_implication with no implication available")
        self.reads += 1
        self.interface_cycles += self.cost.axi_read_cycles
        lit = unpack_literal(self.regs.impl_out)
        self._queue.popleft()
        self._expose_head()
        if self.trace is not None:
            self._log(f"read impl {lit}")
        return lit

    def wait_done(self) -> int:
        """Poll until the in-flight START_BCP reports done or conflict."""
        while True:
            status = self.poll_status()
            if status & (STATUS_DONE | STATUS_CONFLICT | STATUS_ERROR):
                return status
