"""Sanity checks for the reference oracles in conftest."""

from conftest import brute_force, clause_value, naive_unit_propagate


def test_clause_value_three_way():
    assert clause_value([1, 2], {1: True}) is True
    assert clause_value([1, 2], {1: False}) is None
    assert clause_value([1, 2], {1: False, 2: False}) is False


def test_brute_force_small_cases():
    assert brute_force(1, [[1], [-1]]) is None
    assert brute_force(2, [[1, 2]]) is not None
    assert brute_force(2, [[1, 2], [-1, 2], [1, -2], [-1, -2]]) is None


def test_naive_propagation_chain():
    conflict, a = naive_unit_propagate([[-1, 2], [-2, 3], [-3, 4]], {1: True})
    assert not conflict
    assert a == {1: True, 2: True, 3: True, 4: True}


def test_naive_propagation_conflict():
    conflict, _ = naive_unit_propagate([[-1, 2], [-1, -2]], {1: True})
    assert conflict


def test_truth_table_matches_enumeration():
    import random
    from conftest import random_cnf, truth_table_sat
    rng = random.Random(0)
    for _ in range(300):
        n = rng.randint(1, 6)
        cls = random_cnf(rng, n, rng.randint(0, 12))
        assert truth_table_sat(n, cls) == (brute_force(n, cls) is not None)
