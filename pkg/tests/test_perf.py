import math

import pytest
from hypothesis import given, strategies as st

from bcpaccel.cnf import gen_random
from bcpaccel.perf import (
    BCP_EVENT_DEFINITION,
    REFERENCE_ENGINE_MBCPS,
    REFERENCE_MATRIX,
    ComparisonError,
    CostModel,
    PerfCounters,
    effective_throughput,
    engine_throughput,
    format_bcps,
    format_speedup,
    render_matrix,
    render_throughput_table,
    speedup,
    time_breakdown,
)
from bcpaccel.solver import SolverConfig, solve


def test_cost_defaults():
    cm = CostModel()
    assert cm.clock_hz == 106.66e6
    assert (cm.cycles_broadcast, cm.cycles_evaluate, cm.cycles_select) == (1, 1, 1)
    assert (cm.axi_write_cycles, cm.axi_read_cycles, cm.poll_interval_cycles) == (8, 8, 4)


@pytest.mark.parametrize("bad", [
    {"clock_hz": 0}, {"cycles_broadcast": 0}, {"axi_write_cycles": -1},
    {"software_ns_per_clause_visit": -1.0},
])
def test_cost_validation(bad):
    with pytest.raises(ValueError):
        CostModel(**bad)


def test_zero_bus_costs_allowed():
    CostModel(axi_write_cycles=0, axi_read_cycles=0, poll_interval_cycles=0, cycles_load_per_literal=0)


def test_engine_throughput_hand_arithmetic():
    pc = PerfCounters(bcp_events=1000, engine_cycles=3000)
    assert engine_throughput(pc, CostModel()) == 1000 * 106.66e6 / 3000


def test_engine_throughput_needs_cycles():
    with pytest.raises(ValueError):
        engine_throughput(PerfCounters(), CostModel())


def test_breakdown_fractions():
    pc = PerfCounters(engine_cycles=100, swap_cycles=300, software_time_ns=1e9 * 100 / 106.66e6)
    b = time_breakdown(pc, CostModel())
    assert math.isclose(sum(b.values()), 1.0, abs_tol=1e-12)
    assert b["interface"] == 0
    assert math.isclose(b["swap"], 0.6)


def test_breakdown_of_nothing():
    with pytest.raises(ValueError):
        time_breakdown(PerfCounters(), CostModel())


def _pair(num_vars, num_clauses, seed, cost=CostModel(), decisions=30):
    f = gen_random(num_vars, num_clauses, 3, seed)
    runs = {b: solve(f, SolverConfig(backend=b, cost=cost, max_decisions=decisions))
            for b in ("software", "hw-sim")}
    return runs["hw-sim"], runs["software"]


def test_speedup_requires_same_trace():
    hw, sw = _pair(20, 80, 3)
    assert speedup(hw.counters, sw.counters, CostModel()) > 0
    sw.counters.decision_trace = "different"
    with pytest.raises(ComparisonError):
        speedup(hw.counters, sw.counters, CostModel())


def test_single_partition_swap_is_initial_load_only():
    hw, _ = _pair(40, 150, 5)
    pc = hw.counters
    assert hw.partitions == 1 and pc.swaps == 1
    cm = CostModel()
    words = 1 + sum(len(c) for c in gen_random(40, 150, 3, 5).clauses)
    assert pc.swap_cycles == words * (cm.axi_write_cycles + cm.cycles_load_per_literal) \
        - cm.cycles_load_per_literal


def test_effective_never_exceeds_engine():
    for seed in range(5):
        hw, _ = _pair(63, 448, seed)
        pc = hw.counters
        assert effective_throughput(pc, CostModel()) <= engine_throughput(pc, CostModel())


@given(st.floats(0.1, 100.0))
def test_clock_linearity(k):
    pc = PerfCounters(bcp_events=77, engine_cycles=300, swap_cycles=50, interface_cycles=20,
                      software_time_ns=0.0)
    base = CostModel()
    scaled = base.replace(clock_hz=base.clock_hz * k)
    assert math.isclose(engine_throughput(pc, scaled), k * engine_throughput(pc, base), rel_tol=1e-12)
    assert math.isclose(effective_throughput(pc, scaled), k * effective_throughput(pc, base),
                        rel_tol=1e-12)


def test_clock_does_not_change_event_counts():
    f = gen_random(63, 448, 3, 2)
    a = solve(f, SolverConfig(backend="hw-sim", max_decisions=10)).counters
    b = solve(f, SolverConfig(backend="hw-sim", max_decisions=10,
                              cost=CostModel(clock_hz=1e9))).counters
    assert (a.bcp_events, a.engine_cycles, a.swap_cycles, a.interface_cycles) == \
        (b.bcp_events, b.engine_cycles, b.swap_cycles, b.interface_cycles)


def test_formatting():
    assert format_bcps(362e6) == "362M BCP/s"
    assert format_bcps(313e3) == "313K BCP/s"
    assert format_speedup(6.32) == "6.32x"


def test_reference_tables():
    assert REFERENCE_ENGINE_MBCPS["bmc-galileo-8"] == (40, 102, 175)
    assert REFERENCE_ENGINE_MBCPS["bmc-ibm-12"] == (33, 150, 169)
    assert REFERENCE_MATRIX[(63, 22400)] == (313e3, 6.32)
    assert REFERENCE_MATRIX[(630, 224)] is None
    text = render_matrix(REFERENCE_MATRIX, "t")
    assert "6.32x" in text and "NA" in text
    table = render_throughput_table({"x": 1.5e8})
    assert BCP_EVENT_DEFINITION in table and "150.0" in table
