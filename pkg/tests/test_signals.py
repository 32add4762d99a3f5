"""
Tests for signal plans and the data-driven adjustment.
"""

import pytest
from src.types import DataProduct
from src.traffic.network import PhaseGroup, UnknownLinkError, build_grid
from src.traffic.signals import (
    IntersectionTiming, InvalidAdjustmentError, SignalPlan, apply_data_driven_adjustment,
)


def product_on(link_id):
    return DataProduct(link_id=link_id, position_m=400.0, observed_at_s=230, severity=0.5,
                       observed_flow_vph=220.0)


def test_timing_phase_order():
    """Test that NS holds green first in each cycle."""
    timing = IntersectionTiming(60, 30, 30)
    assert timing.phase_at(0) is PhaseGroup.NS
    assert timing.phase_at(29) is PhaseGroup.NS
    assert timing.phase_at(30) is PhaseGroup.EW
    assert timing.phase_at(59) is PhaseGroup.EW
    assert timing.phase_at(60) is PhaseGroup.NS


def test_timing_offset():
    """Test that the offset shifts the cycle start."""
    timing = IntersectionTiming(60, 30, 30, offset_s=10)
    assert timing.phase_at(5) is PhaseGroup.EW
    assert timing.phase_at(10) is PhaseGroup.NS


@pytest.mark.parametrize("cycle,ns,ew,offset", [
    (60, 0, 60, 0),
    (60, 30, 20, 0),
    (60, 30, 30, 60),
])
def test_timing_validation(cycle, ns, ew, offset):
    """Test timing invariants."""
    with pytest.raises(ValueError):
        IntersectionTiming(cycle, ns, ew, offset)


def test_fixed_time_plan():
    """Test that a uniform plan covers every intersection and approach."""
    network = build_grid(2, 2)
    plan = SignalPlan.fixed_time(network)
    assert set(plan.timings) == set(network.intersections)
    assert set(plan.approaches) == set(network.approaches)
    assert plan.is_green(6, 30)
    assert not plan.is_green(6, 0)


def test_fixed_time_offsets_per_column():
    """Test the green wave offset."""
    plan = SignalPlan.fixed_time(build_grid(2, 2), offset_step_s=15)
    assert plan.timings[(0, 0)].offset_s == 0
    assert plan.timings[(0, 1)].offset_s == 15
    assert plan.timings[(1, 1)].offset_s == 15


def test_is_green_unknown_link():
    """Test that exit links are not signalised."""
    plan = SignalPlan.fixed_time(build_grid(1, 1))
    with pytest.raises(UnknownLinkError):
        plan.is_green(1, 0)


def test_adjustment_moves_green_toward_accident():
    """Test the split change at the downstream intersection only."""
    network = build_grid(2, 2)
    plan = SignalPlan.fixed_time(network)
    adjusted = apply_data_driven_adjustment(plan, product_on(6), 3)

    timing = adjusted.timings[(0, 1)]
    assert (timing.green_ns_s, timing.green_ew_s) == (27, 33)
    assert timing.cycle_s == 60
    for node in [(0, 0), (1, 0), (1, 1)]:
        assert adjusted.timings[node] == plan.timings[node]
    assert plan.timings[(0, 1)].green_ew_s == 30


def test_adjustment_ns_approach():
    """Test that an NS accident approach gains NS green."""
    plan = SignalPlan.fixed_time(build_grid(1, 1))
    adjusted = apply_data_driven_adjustment(plan, product_on(0), 5)
    assert adjusted.timings[(0, 0)].green_ns_s == 35


def test_adjustment_zero_delta_is_identity():
    """Test that delta 0 leaves timings equal."""
    plan = SignalPlan.fixed_time(build_grid(2, 2))
    adjusted = apply_data_driven_adjustment(plan, product_on(6), 0)
    assert dict(adjusted.timings) == dict(plan.timings)


def test_adjustment_errors():
    """Test unknown links and over-large deltas."""
    plan = SignalPlan.fixed_time(build_grid(1, 1))
    with pytest.raises(UnknownLinkError):
        apply_data_driven_adjustment(plan, product_on(1), 3)
    with pytest.raises(InvalidAdjustmentError):
        apply_data_driven_adjustment(plan, product_on(0), 30)


def test_green_elapsed():
    """Test seconds since the start of each phase's green."""
    timing = IntersectionTiming(60, 27, 33, offset_s=10)
    assert timing.green_elapsed_s(PhaseGroup.NS, 10) == 0
    assert timing.green_elapsed_s(PhaseGroup.NS, 36) == 26
    assert timing.green_elapsed_s(PhaseGroup.NS, 37) is None
    assert timing.green_elapsed_s(PhaseGroup.EW, 37) == 0
    assert timing.green_elapsed_s(PhaseGroup.EW, 69) == 32
    assert timing.green_elapsed_s(PhaseGroup.EW, 70) is None

    adjusted = apply_data_driven_adjustment(SignalPlan.fixed_time(build_grid(2, 2)),
                                            product_on(6), 3)
    assert adjusted.green_elapsed_s(6, 27) == 0
    assert adjusted.green_elapsed_s(6, 59) == 32
    with pytest.raises(UnknownLinkError):
        adjusted.green_elapsed_s(99, 0)
