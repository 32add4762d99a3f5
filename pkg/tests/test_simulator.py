"""
Tests for the point-queue simulator.
"""

import pytest
from src.traffic.network import InvalidScenarioError, TrafficError, build_grid
from src.metrics.waiting import average_waiting_time
from src.traffic.signals import SignalPlan
from src.traffic.simulator import (
    AccidentEvent, Scenario, SimEvent, SimEventKind, Simulation, UnknownVehicleError,
    event_digest, run,
)


def lone_vehicles(accidents=()):
    """One vehicle per entry of a 1x1 grid, all spawned at t=0."""
    network = build_grid(1, 1)
    scenario = Scenario(network, flow_vph=1.0, accidents=list(accidents), phase_offset=0.0)
    return scenario, SignalPlan.fixed_time(network)


def test_red_approach_waits_for_green():
    """Test waits for vehicles arriving on red and on green."""
    scenario, plan = lone_vehicles()
    result = run(scenario, plan, 200, seed=0)
    # NS vehicles reach the stop line at t=36 during EW green and leave at t=60
    assert result.waits == {0: 24, 1: 0, 2: 0, 3: 24}
    assert result.n == 4


def test_full_blockage_holds_queue():
    """Test that a severity 1 accident stops discharge until it clears."""
    accident = AccidentEvent(link_id=0, position_m=400.0, start_s=0, end_s=100, severity=1.0)
    scenario, plan = lone_vehicles([accident])
    result = run(scenario, plan, 200, seed=0)
    assert result.waits[0] == 84
    assert result.waits[3] == 24
    kinds = [e.kind for e in result.events]
    assert SimEventKind.ACCIDENT_ON in kinds
    assert SimEventKind.ACCIDENT_OFF in kinds


def test_event_log_order():
    """Test the spawn, queue, discharge and exit sequence of one vehicle."""
    scenario, plan = lone_vehicles()
    result = run(scenario, plan, 200, seed=0)
    trail = [(e.t_s, e.kind) for e in result.events if e.vehicle_id == 0]
    assert trail == [
        (0, SimEventKind.SPAWN),
        (36, SimEventKind.QUEUE_JOIN),
        (60, SimEventKind.DISCHARGE),
        (96, SimEventKind.EXIT),
    ]


def test_determinism():
    """Test that equal inputs produce identical event logs."""
    network = build_grid(2, 2)
    accident = AccidentEvent(6, 400.0, 200, 700, 0.5)
    scenario = Scenario(network, 220.0, [accident])
    plan = SignalPlan.fixed_time(network)
    first = run(scenario, plan, 1000, seed=0)
    second = run(scenario, plan, 1000, seed=0)
    assert first.digest() == second.digest()
    assert first.waits == second.waits
    assert run(scenario, plan, 1000, seed=1).digest() != first.digest()


def test_plan_change_recorded():
    """Test that scheduled plan changes add a snapshot and an event."""
    scenario, plan = lone_vehicles()
    result = run(scenario, plan, 100, seed=0, plan_changes=[(50, plan)])
    assert [s.t_s for s in result.snapshots] == [50, 100]
    assert SimEvent(50, SimEventKind.PLAN_CHANGE) in result.events


def test_conservation_every_tick():
    """Test spawned == completed + in transit + queued throughout a congested run."""
    network = build_grid(2, 2)
    scenario = Scenario(network, 900.0, [AccidentEvent(6, 400.0, 50, 400, 0.8)])
    simulation = Simulation(scenario, SignalPlan.fixed_time(network), 500, seed=4)
    while not simulation.finished:
        simulation.advance()
        simulation.state.check_conservation()
    assert simulation.result().n == simulation.state.spawned


def test_advance_past_horizon():
    """Test that a finished simulation cannot advance."""
    scenario, plan = lone_vehicles()
    simulation = Simulation(scenario, plan, 1, seed=0)
    simulation.advance()
    with pytest.raises(TrafficError, match="horizon"):
        simulation.advance()


def test_active_vehicles_on():
    """Test lookup of vehicles by current link."""
    scenario, plan = lone_vehicles()
    simulation = Simulation(scenario, plan, 200, seed=0)
    simulation.advance()
    assert simulation.active_vehicles_on({0, 2}) == [0, 1]
    with pytest.raises(UnknownVehicleError):
        simulation.state.vehicle(99)


def test_zero_horizon():
    """Test an empty run."""
    scenario, plan = lone_vehicles()
    result = run(scenario, plan, 0, seed=0)
    assert result.n == 0
    assert result.events == []


def test_accident_validation():
    """Test accident parameter checks."""
    with pytest.raises(InvalidScenarioError):
        AccidentEvent(0, 400.0, 10, 10, 0.5)
    with pytest.raises(InvalidScenarioError):
        AccidentEvent(0, 400.0, 0, 10, 0.0)
    network = build_grid(1, 1)
    bad_link = Scenario(network, 100.0, [AccidentEvent(99, 10.0, 0, 10, 0.5)])
    with pytest.raises(InvalidScenarioError, match="unknown link"):
        bad_link.validate()
    too_far = Scenario(network, 100.0, [AccidentEvent(0, 600.0, 0, 10, 0.5)])
    with pytest.raises(InvalidScenarioError, match="beyond"):
        too_far.validate()


def test_event_digest_changes_with_log():
    """Test that the digest reflects every event."""
    events = [SimEvent(0, SimEventKind.SPAWN, 0, 0)]
    assert event_digest(events) != event_digest(events + [SimEvent(1, SimEventKind.EXIT, 0, 6)])
    assert SimEvent.from_row(events[0].to_row()) == events[0]


def test_blocked_green_delays_discharge():
    """Test that a wreck holding the start of each green delays the queue."""
    partial = AccidentEvent(0, 400.0, 0, 100, 0.5)
    blocked = AccidentEvent(0, 400.0, 0, 100, 0.5, blocked_green_s=10)
    scenario, plan = lone_vehicles([partial])
    # 1.5 effective lanes need two ticks of credit from the start of green at t=60
    assert run(scenario, plan, 200, seed=0).waits[0] == 25
    scenario, plan = lone_vehicles([blocked])
    result = run(scenario, plan, 200, seed=0)
    assert result.waits[0] == 35
    assert result.waits[3] == 24
    with pytest.raises(InvalidScenarioError, match="Blocked green"):
        AccidentEvent(0, 400.0, 0, 100, 0.5, blocked_green_s=-1)


def default_world(severity=None, flow_vph=220.0):
    network = build_grid(2, 2)
    accidents = []
    if severity is not None:
        accidents.append(AccidentEvent(6, 400.0, 200, 700, severity, blocked_green_s=27))
    return Scenario(network, flow_vph, accidents), SignalPlan.fixed_time(network)


def test_waiting_grows_with_severity():
    """Test that a heavier accident never lowers the average waiting time."""
    phis = []
    for severity in (None, 0.5, 1.0):
        scenario, plan = default_world(severity)
        phis.append(average_waiting_time(run(scenario, plan, 1000, seed=0)))
    assert phis[0] <= phis[1] <= phis[2]
    assert phis[0] < phis[2]


def test_queue_invariants_every_tick():
    """Test that waits never shrink and no vehicle sits in two queues."""
    scenario, plan = default_world(0.8, flow_vph=600.0)
    simulation = Simulation(scenario, plan, 800, seed=2)
    previous = {}
    while not simulation.finished:
        simulation.advance()
        state = simulation.state
        queued = [vid for queue in state.queues.values() for vid in queue]
        assert len(queued) == len(set(queued))
        for link_id, queue in state.queues.items():
            assert all(state.vehicles[vid].current_link == link_id for vid in queue)
            assert all(state.vehicles[vid].is_queued for vid in queue)
        for vid, record in state.vehicles.items():
            assert record.accumulated_wait_s >= previous.get(vid, 0)
            previous[vid] = record.accumulated_wait_s


def test_samples_at_fixed_cadence():
    """Test the periodic counters recorded for waiting-time curves."""
    scenario, plan = default_world(0.5)
    result = run(scenario, plan, 100, seed=0, sample_period_s=20)
    assert [s.t_s for s in result.samples] == [0, 20, 40, 60, 80, 100]
    assert result.samples[0].mean_wait_s == 0.0
    assert result.samples[-1].spawned == result.n
    with pytest.raises(InvalidScenarioError, match="sample_period_s"):
        Simulation(scenario, plan, 100, seed=0, sample_period_s=0)
