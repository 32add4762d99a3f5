"""
Tests for demand generation.
"""

import pytest
from src.traffic.demand import ArrivalPattern, generate_demand
from src.traffic.network import InvalidScenarioError, build_grid


def test_fixed_headway_spawns():
    """Test evenly spaced spawns with a pinned offset."""
    network = build_grid(1, 1)
    events = generate_demand(network, 360.0, 60, seed=0, phase_offset=0.0)
    entry_times = [e.t_s for e in events if e.entry_link == 0]
    assert entry_times == [0, 10, 20, 30, 40, 50]
    assert len(events) == 24


def test_spawns_sorted_and_routed():
    """Test ordering by (t_s, entry) and attached routes."""
    network = build_grid(2, 2)
    events = generate_demand(network, 220.0, 1000, seed=3)
    keys = [(e.t_s, e.entry_link) for e in events]
    assert keys == sorted(keys)
    for event in events:
        assert event.route == network.route_for(event.entry_link)
        assert 0 <= event.t_s < 1000


def test_fixed_count_matches_rate():
    """Test that each entry receives about flow * horizon / 3600 vehicles."""
    network = build_grid(2, 2)
    events = generate_demand(network, 220.0, 1000, seed=0)
    for entry_id in network.entries:
        count = sum(1 for e in events if e.entry_link == entry_id)
        assert count in (61, 62)


def test_same_seed_same_demand():
    """Test determinism for both arrival patterns."""
    network = build_grid(2, 2)
    for pattern in ArrivalPattern:
        first = generate_demand(network, 300.0, 500, seed=7, arrivals=pattern)
        second = generate_demand(network, 300.0, 500, seed=7, arrivals=pattern)
        assert first == second


def test_poisson_differs_by_seed():
    """Test that Poisson arrivals depend on the seed."""
    network = build_grid(1, 1)
    first = generate_demand(network, 300.0, 2000, seed=1, arrivals=ArrivalPattern.POISSON)
    second = generate_demand(network, 300.0, 2000, seed=2, arrivals=ArrivalPattern.POISSON)
    assert [e.t_s for e in first] != [e.t_s for e in second]


def test_zero_flow():
    """Test that zero flow produces no vehicles."""
    assert generate_demand(build_grid(1, 1), 0.0, 100, seed=0) == []


def test_invalid_parameters():
    """Test negative flow and empty horizon."""
    network = build_grid(1, 1)
    with pytest.raises(InvalidScenarioError, match="flow_vph"):
        generate_demand(network, -1.0, 100, seed=0)
    with pytest.raises(InvalidScenarioError, match="horizon_s"):
        generate_demand(network, 100.0, 0, seed=0)
