"""Independent reference implementations used as test oracles.

Nothing here imports solver internals: the brute-force check enumerates
assignments with itertools and the unit propagator is the textbook
"find a unit clause, assign it, start over" loop.
"""

import itertools
import random

import pytest


def clause_value(clause, assignment):
    """True/False/None for a list of signed literals under a partial dict."""
    undecided = False
    for lit in clause:
        val = assignment.get(abs(lit))
        if val is None:
            undecided = True
        elif val == (lit > 0):
            return True
    return None if undecided else False


def brute_force(num_vars, clauses):
    """Return a satisfying dict or None by trying every assignment."""
    for bits in itertools.product((False, True), repeat=num_vars):
        assignment = {v + 1: bits[v] for v in range(num_vars)}
        if all(clause_value(c, assignment) for c in clauses):
            return assignment
    return None


def naive_unit_propagate(clauses, assignment):
    """Sequential unit propagation to fixpoint.

    Returns (conflict, assignment). The input dict is not modified.
    """
    a = dict(assignment)
    while True:
        progress = False
        for clause in clauses:
            if clause_value(clause, a) is False:
                return True, a
            free = [l for l in clause if abs(l) not in a]
            if len(free) == 1 and clause_value(clause, a) is None:
                # any literal already true would have made the clause True
                a[abs(free[0])] = free[0] > 0
                progress = True
                break
        if not progress:
            return False, a


def random_cnf(rng, num_vars, num_clauses, max_len=3, min_len=1):
    clauses = []
    for _ in range(num_clauses):
        k = rng.randint(min_len, min(max_len, num_vars))
        vs = rng.sample(range(1, num_vars + 1), k)
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return clauses


@pytest.fixture
def rng():
    return random.Random(12345)


def plan_violations(formula, plan, limits):
    """List every way ``plan`` breaks the partitioning contract (empty if none)."""
    problems = []
    seen = []
    for p in plan.partitions:
        seen.extend(p.clause_indices)
        if not p.clause_indices:
            problems.append(f"partition {p.id} is empty")
        if len(p.clause_indices) > limits.max_clauses:
            problems.append(f"partition {p.id} has {len(p.clause_indices)} clauses")
        union = set()
        for i in p.clause_indices:
            union |= {abs(l) for l in formula.clauses[i].literals}
        if union != set(p.local_vars):
            problems.append(f"partition {p.id} local_vars mismatch")
        if len(union) > limits.max_vars:
            problems.append(f"partition {p.id} has {len(union)} variables")
    if [p.id for p in plan.partitions] != list(range(len(plan.partitions))):
        problems.append("partition ids are not 0..n-1")
    # disjoint cover, and source order preserved across the concatenation
    if seen != list(range(formula.num_clauses)):
        problems.append("clauses not covered exactly once in source order")
    return problems


def engine_case(rng, num_vars=12, max_clauses=30):
    """A random partition plus a consistent prior assignment and a trigger.

    Returns (clauses, prior_literals, trigger). The prior never contains
    the trigger variable; it may already force further literals.
    """
    clauses = random_cnf(rng, num_vars, rng.randint(1, max_clauses), max_len=4)
    vs = list(range(1, num_vars + 1))
    rng.shuffle(vs)
    k = rng.randint(0, num_vars // 2)
    prior = [v if rng.random() < 0.5 else -v for v in vs[:k]]
    t = vs[k]
    return clauses, prior, t if rng.random() < 0.5 else -t


def random_script(rng, num_vars=10, length=25):
    """A random mix of accelerator operations, including some invalid ones.

    Ops: ("load", pid, clauses), ("broadcast", lit, level),
    ("clear", level), ("start", lit_or_None, level), ("read",), ("nop",).
    """
    ops = []
    level = 0
    for _ in range(length):
        r = rng.random()
        if r < 0.12 or not ops:
            clauses = [tuple(c) for c in random_cnf(rng, num_vars, rng.randint(1, 12), max_len=4)]
            ops.append(("load", rng.randint(0, 5), clauses))
        elif r < 0.35:
            lit = rng.choice([1, -1]) * rng.randint(1, num_vars)
            ops.append(("broadcast", lit, rng.randint(0, level)))
        elif r < 0.6:
            level += 1
            lit = rng.choice([1, -1]) * rng.randint(1, num_vars)
            ops.append(("start", None if rng.random() < 0.15 else lit, level))
        elif r < 0.75:
            level = rng.randint(0, level)
            ops.append(("clear", level))
        elif r < 0.95:
            ops.append(("read",))
        else:
            ops.append(("nop",))
    return ops


def truth_table_sat(num_vars, clauses):
    """Truth-table verdict using one big-int bitset per literal.

    Bit i of a mask stands for the assignment where variable v is
    ((i >> (v-1)) & 1).
    """
    size = 1 << num_vars
    full = (1 << size) - 1
    pos = {}
    for v in range(1, num_vars + 1):
        block = (1 << (1 << (v - 1))) - 1          # 2^(v-1) ones
        period = block << (1 << (v - 1))           # ones in the upper half of a period
        mask = 0
        step = 1 << v
        for start in range(0, size, step):
            mask |= period << start
        pos[v] = mask
    alive = full
    for clause in clauses:
        cm = 0
        for lit in clause:
            cm |= pos[abs(lit)] if lit > 0 else full & ~pos[abs(lit)]
        alive &= cm
        if not alive:
            return False
    return alive != 0


ACCEPTANCE = []


def record_acceptance(number, title, ok, detail):
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
