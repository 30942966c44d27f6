"""Exhaustive truth-table satisfiability check for small formulas."""

from __future__ import annotations

from typing import Dict, Optional

import numpy as np

from .cnf import Formula

MAX_ORACLE_VARS = 24


class OracleLimitError(ValueError):
    pass


def brute_force_model(
    formula: Formula, max_vars: int = MAX_ORACLE_VARS, chunk_bits: int = 20
) -> Optional[Dict[int, bool]]:
    """First satisfying assignment in binary counting order, or None.

    Assignment ``i`` sets variable ``v`` to bit ``v-1`` of ``i``.
    """
    n = formula.num_vars
    if n > max_vars:
        raise OracleLimitError(f"{n} variables exceed the oracle cap of {max_vars}")
    if formula.has_empty_clause:
        return None
    clauses = [c.literals for c in formula.clauses]
    total = 1 << n
    step = min(total, 1 << chunk_bits)
    shifts = np.arange(n, dtype=np.int64)
    for start in range(0, total, step):
        idx = np.arange(start, min(start + step, total), dtype=np.int64)
        bits = ((idx[:, None] >> shifts) & 1).astype(bool)
        ok = np.ones(len(idx), dtype=bool)
        for lits in clauses:
            sat = np.zeros(len(idx), dtype=bool)
            for lit in lits:
                col = bits[:, abs(lit) - 1]
                sat |= col if lit > 0 else ~col
            ok &= sat
            if not ok.any():
                break
        hits = np.flatnonzero(ok)
        if hits.size:
            i = int(idx[hits[0]])
            return {v: bool((i >> (v - 1)) & 1) for v in range(1, n + 1)}
    return None


def brute_force_sat(formula: Formula, max_vars: int = MAX_ORACLE_VARS) -> bool:
    return brute_force_model(formula, max_vars) is not None
