"""Split a formula into accelerator-sized partitions.

The greedy strategy walks the clauses in file order and keeps filling the
current partition until either the clause budget or the variable budget
would be exceeded.  Any callable with the signature of
:func:`greedy_partition` can stand in as an alternative strategy.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, TextIO

from .cnf import Formula


class PartitionError(ValueError):
    def __init__(self, clause_index: int, reason: str):
        super().__init__(f"clause {clause_index}: {reason}")
        self.clause_index = clause_index


@dataclass(frozen=True)
class PartitionLimits:
    max_clauses: int = 224
    max_vars: int = 63
    max_literals_per_clause: int = 16

    def __post_init__(self):
        for name in ("max_clauses", "max_vars", "max_literals_per_clause"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class Partition:
    id: int
    clause_indices: tuple
    local_vars: frozenset


@dataclass(frozen=True)
class PartitionPlan:
    partitions: tuple
    dispersion: Dict[int, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.partitions)

    @classmethod
    def from_partitions(cls, partitions) -> "PartitionPlan":
        counts = Counter()
        for p in partitions:
            counts.update(p.local_vars)
        return cls(tuple(partitions), dict(sorted(counts.items())))

    def partitions_of(self) -> Dict[int, tuple]:
        """Map each variable to the ids of the partitions it occurs in."""
        index: Dict[int, list] = {}
        for p in self.partitions:
            for v in p.local_vars:
                index.setdefault(v, []).append(p.id)
        return {v: tuple(ids) for v, ids in index.items()}


PartitionStrategy = Callable[[Formula, PartitionLimits], PartitionPlan]


def greedy_partition(formula: Formula, limits: PartitionLimits = PartitionLimits()) -> PartitionPlan:
    partitions = []
    indices: list = []
    local: set = set()

    def seal():
        partitions.append(Partition(len(partitions), tuple(indices), frozenset(local)))

    for idx, clause in enumerate(formula.clauses):
        if len(clause) > limits.max_literals_per_clause:
            raise PartitionError(
                idx, f"{len(clause)} literals exceed slot capacity {limits.max_literals_per_clause}"
            )
        cvars = clause.variables
        if len(cvars) > limits.max_vars:
            raise PartitionError(idx, f"{len(cvars)} variables exceed partition capacity {limits.max_vars}")
        if indices and (len(indices) + 1 > limits.max_clauses or len(local | cvars) > limits.max_vars):
            seal()
            indices, local = [], set()
        indices.append(idx)
        local |= cvars
    if indices:
        seal()
    return PartitionPlan.from_partitions(partitions)


@dataclass(frozen=True)
class DispersionStats:
    max: int
    mean: Fraction
    total_cross_vars: int


def dispersion_stats(plan: PartitionPlan) -> DispersionStats:
    """Summarise how many partitions each occurring variable is spread over."""
    counts = Counter()
    for p in plan.partitions:
        counts.update(p.local_vars)
    if not counts:
        return DispersionStats(0, Fraction(0), 0)
    values = list(counts.values())
    return DispersionStats(
        max=max(values),
        mean=Fraction(sum(values), len(values)),
        total_cross_vars=sum(1 for n in values if n > 1),
    )


def write_plan_csv(plan: PartitionPlan, fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["partition_id", "clause_index"])
    for p in plan.partitions:
        for idx in p.clause_indices:
            w.writerow([p.id, idx])


def write_dispersion_csv(plan: PartitionPlan, fh: TextIO) -> None:
    """Histogram: how many variables occur in exactly ``dispersion`` partitions."""
    hist = Counter(plan.dispersion.values())
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["dispersion", "num_vars"])
    for d in sorted(hist):
        w.writerow([d, hist[d]])
