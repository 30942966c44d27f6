"""CNF data model, DIMACS reading/writing and reference clause semantics.

Literals are signed integers in the DIMACS convention: ``v`` is the
variable ``v`` and ``-v`` its negation.  Assignments are plain mappings
``var -> bool``; a variable that is missing (or mapped to ``None``) is
unassigned.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, TextIO, Union


class ParseError(ValueError):
    """Malformed DIMACS input."""


def lit_var(lit: int) -> int:
    return lit if lit > 0 else -lit


def lit_value(lit: int, assignment: Mapping[int, Optional[bool]]) -> Optional[bool]:
    """Truth value of ``lit`` under ``assignment`` (None when unassigned)."""
    value = assignment.get(lit if lit > 0 else -lit)
    if value is None:
        return None
    return value if lit > 0 else not value


@dataclass(frozen=True)
class Clause:
    literals: tuple

    @classmethod
    def of(cls, literals: Iterable[int]) -> "Clause":
        """Build a clause, dropping repeated literals (first occurrence kept)."""
        seen = []
        for lit in literals:
            lit = int(lit)
            if lit == 0:
                raise ValueError("0 is not a literal")
            if lit not in seen:
                seen.append(lit)
        return cls(tuple(seen))

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    @property
    def is_empty(self) -> bool:
        return not self.literals

    @property
    def tautological(self) -> bool:
        lits = set(self.literals)
        return any(-lit in lits for lit in lits)

    @property
    def variables(self) -> frozenset:
        return frozenset(lit_var(lit) for lit in self.literals)


@dataclass(frozen=True)
class Formula:
    num_vars: int
    clauses: tuple

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        for idx, clause in enumerate(self.clauses):
            for lit in clause.literals:
                if lit_var(lit) > self.num_vars:
                    raise ValueError(
                        f"clause {idx}: literal {lit} exceeds num_vars={self.num_vars}"
                    )

    @classmethod
    def from_lists(cls, num_vars: int, clauses: Iterable[Iterable[int]]) -> "Formula":
        return cls(num_vars, tuple(Clause.of(c) for c in clauses))

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def has_empty_clause(self) -> bool:
        """True when the formula holds the explicit empty-clause (UNSAT) marker."""
        return any(c.is_empty for c in self.clauses)

    def as_lists(self) -> list:
        return [list(c.literals) for c in self.clauses]


class ClauseStatus(enum.Enum):
    SATISFIED = "satisfied"
    FALSIFIED = "falsified"
    UNIT = "unit"
    UNRESOLVED = "unresolved"


def eval_clause(clause: Clause, assignment: Mapping[int, Optional[bool]]):
    """Classify ``clause`` under a partial assignment.

    Returns ``(status, literal)`` where ``literal`` is the forced literal
    for ``UNIT`` and ``None`` otherwise.  Tautologies are always satisfied.
    """
    if clause.tautological:
        return ClauseStatus.SATISFIED, None
    free = None
    n_free = 0
    for lit in clause.literals:
        value = lit_value(lit, assignment)
        if value is None:
            n_free += 1
            free = lit
        elif value:
            return ClauseStatus.SATISFIED, None
    if n_free == 0:
        return ClauseStatus.FALSIFIED, None
    if n_free == 1:
        return ClauseStatus.UNIT, free
    return ClauseStatus.UNRESOLVED, None


def eval_formula(formula: Formula, assignment: Mapping[int, Optional[bool]]) -> bool:
    """True iff every clause is satisfied by the full ``assignment``."""
    for var in range(1, formula.num_vars + 1):
        if assignment.get(var) is None:
            raise ValueError(f"variable {var} is unassigned")
    return all(
        eval_clause(c, assignment)[0] is ClauseStatus.SATISFIED for c in formula.clauses
    )


def parse_dimacs(source: Union[str, TextIO]) -> Formula:
    """Parse DIMACS CNF text (a string or an open text stream).

    A bare ``0`` yields an empty clause, kept as the UNSAT marker.
    """
    text = source if isinstance(source, str) else source.read()
    header = None
    clauses = []
    current = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("%"):
            break  # SATLIB end-of-data marker
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if header is not None:
                raise ParseError(f"line {lineno}: duplicate header")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"line {lineno}: bad header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise ParseError(f"line {lineno}: bad header {line!r}") from None
            if header[0] < 0 or header[1] < 0:
                raise ParseError(f"line {lineno}: negative header count")
            continue
        if header is None:
            raise ParseError(f"line {lineno}: clause data before 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"line {lineno}: bad token {tok!r}") from None
            if lit == 0:
                clauses.append(current)
                current = []
                continue
            if abs(lit) > header[0]:
                raise ParseError(
                    f"line {lineno}: literal {lit} exceeds declared {header[0]} variables"
                )
            current.append(lit)
    if header is None:
        raise ParseError("missing 'p cnf' header")
    if current:
        clauses.append(current)
    if len(clauses) != header[1]:
        raise ParseError(f"header declares {header[1]} clauses, found {len(clauses)}")
    return Formula.from_lists(header[0], clauses)


def serialize_dimacs(formula: Formula) -> str:
    lines = [f"p cnf {formula.num_vars} {formula.num_clauses}"]
    for clause in formula.clauses:
        lines.append(" ".join(str(lit) for lit in clause.literals) + (" 0" if clause.literals else "0"))
    return "\n".join(lines) + "\n"


def gen_random(num_vars: int, num_clauses: int, clause_len: int, seed: int) -> Formula:
    """Uniform random k-CNF: distinct variables per clause, fair polarities."""
    if clause_len < 1:
        raise ValueError("clause_len must be at least 1")
    if clause_len > num_vars:
        raise ValueError(f"clause_len={clause_len} exceeds num_vars={num_vars}")
    if num_clauses < 0:
        raise ValueError("num_clauses must be non-negative")
    rng = random.Random(seed)
    pool = range(1, num_vars + 1)
    clauses = []
    for _ in range(num_clauses):
        chosen = rng.sample(pool, clause_len)
        clauses.append(Clause(tuple(v if rng.random() < 0.5 else -v for v in chosen)))
    return Formula(num_vars, tuple(clauses))
