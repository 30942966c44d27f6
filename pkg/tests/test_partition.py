import io
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bcpaccel.cnf import Formula, gen_random
from bcpaccel.partition import (
    PartitionError,
    PartitionLimits,
    dispersion_stats,
    greedy_partition,
    write_dispersion_csv,
    write_plan_csv,
)

from conftest import plan_violations, random_cnf


def test_default_limits():
    lim = PartitionLimits()
    assert (lim.max_clauses, lim.max_vars, lim.max_literals_per_clause) == (224, 63, 16)


def test_limits_validate():
    with pytest.raises(ValueError):
        PartitionLimits(max_clauses=0)


def test_single_partition_when_it_fits():
    f = gen_random(63, 224, 3, 1)
    plan = greedy_partition(f)
    assert len(plan) == 1
    assert plan.partitions[0].clause_indices == tuple(range(224))


def test_clause_cap_splits():
    f = gen_random(63, 448, 3, 1)
    plan = greedy_partition(f)
    assert [len(p.clause_indices) for p in plan.partitions] == [224, 224]


def test_variable_cap_splits():
    # each clause brings two fresh variables
    f = Formula.from_lists(8, [[1, 2], [3, 4], [5, 6], [7, 8]])
    plan = greedy_partition(f, PartitionLimits(max_vars=4))
    assert [p.clause_indices for p in plan.partitions] == [(0, 1), (2, 3)]
    assert plan.dispersion == {v: 1 for v in range(1, 9)}


def test_clause_too_long():
    f = Formula.from_lists(17, [list(range(1, 18))])
    with pytest.raises(PartitionError) as err:
        greedy_partition(f)
    assert err.value.clause_index == 0


def test_clause_with_too_many_vars():
    f = Formula.from_lists(5, [[1], [1, 2, 3, 4, 5]])
    with pytest.raises(PartitionError) as err:
        greedy_partition(f, PartitionLimits(max_vars=4))
    assert err.value.clause_index == 1


def test_empty_formula_has_no_partitions():
    assert len(greedy_partition(Formula.from_lists(3, []))) == 0


def test_dispersion_counts_partitions():
    f = Formula.from_lists(3, [[1, 2], [1, 3], [1, 2]])
    plan = greedy_partition(f, PartitionLimits(max_clauses=1))
    assert plan.dispersion == {1: 3, 2: 2, 3: 1}
    stats = dispersion_stats(plan)
    assert stats.max == 3
    assert stats.mean == Fraction(6, 3)
    assert stats.total_cross_vars == 2
    assert plan.partitions_of()[2] == (0, 2)


def test_csv_writers():
    f = Formula.from_lists(3, [[1, 2], [1, 3], [1, 2]])
    plan = greedy_partition(f, PartitionLimits(max_clauses=2))
    buf = io.StringIO()
    write_plan_csv(plan, buf)
    assert buf.getvalue() == "partition_id,clause_index\n0,0\n0,1\n1,2\n"
    buf = io.StringIO()
    write_dispersion_csv(plan, buf)
    assert buf.getvalue() == "dispersion,num_vars\n1,1\n2,2\n"


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 40), st.integers(1, 12), st.integers(3, 30))
def test_plans_respect_invariants(seed, max_clauses, max_vars_extra, n):
    rng = random.Random(seed)
    f = Formula.from_lists(n, random_cnf(rng, n, rng.randint(0, 120), max_len=3))
    limits = PartitionLimits(max_clauses=max_clauses, max_vars=3 + max_vars_extra)
    plan = greedy_partition(f, limits)
    assert plan_violations(f, plan, limits) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_greedy_is_maximal(seed):
    """A partition is only sealed when the next clause really does not fit."""
    rng = random.Random(seed)
    f = Formula.from_lists(20, random_cnf(rng, 20, 60))
    limits = PartitionLimits(max_clauses=7, max_vars=9)
    plan = greedy_partition(f, limits)
    for p, nxt in zip(plan.partitions, plan.partitions[1:]):
        first = f.clauses[nxt.clause_indices[0]]
        fits = len(p.clause_indices) < limits.max_clauses and \
            len(p.local_vars | first.variables) <= limits.max_vars
        assert not fits
