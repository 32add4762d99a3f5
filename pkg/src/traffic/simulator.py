"""
Discrete-time point-queue traffic simulator.

Vehicles traverse links at free-flow speed and then wait in a FIFO queue at
the downstream stop line. Green approaches discharge at a saturation rate
per effective lane; accidents cut the effective lane count and may hold the
approach for the first seconds of every green.
"""

import hashlib
import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Dict, List, Optional, Sequence, Set, Tuple

from src.traffic.demand import ArrivalPattern, SpawnEvent, generate_demand
from src.traffic.network import (
    RoadNetwork, TrafficError, InvalidScenarioError,
)
from src.traffic.signals import SignalPlan

logger = logging.getLogger(__name__)

DEFAULT_SATURATION_RATE = 0.5
DEFAULT_SAMPLE_PERIOD_S = 10


class UnknownVehicleError(TrafficError):
    """Raised when a vehicle id is not part of the simulation."""
    pass


class SimEventKind(Enum):
    """Kinds of entries in the simulation event log."""
    SPAWN = "spawn"
    QUEUE_JOIN = "queue_join"
    DISCHARGE = "discharge"
    EXIT = "exit"
    ACCIDENT_ON = "accident_on"
    ACCIDENT_OFF = "accident_off"
    PLAN_CHANGE = "plan_change"


@dataclass(frozen=True)
class SimEvent:
    """One entry of the simulation event log."""
    t_s: int
    kind: SimEventKind
    vehicle_id: Optional[int] = None
    link_id: Optional[int] = None

    def to_row(self) -> Tuple[str, str, str, str]:
        return (
            str(self.t_s),
            self.kind.value,
            "" if self.vehicle_id is None else str(self.vehicle_id),
            "" if self.link_id is None else str(self.link_id),
        )

    @classmethod
    def from_row(cls, row: Sequence[str]) -> "SimEvent":
        t_s, kind, vehicle_id, link_id = row
        return cls(
            t_s=int(t_s),
            kind=SimEventKind(kind),
            vehicle_id=int(vehicle_id) if vehicle_id else None,
            link_id=int(link_id) if link_id else None,
        )


def event_digest(events: Sequence[SimEvent]) -> str:
    """SHA-256 over the event log, used to compare runs for determinism."""
    hasher = hashlib.sha256()
    for event in events:
        hasher.update((",".join(event.to_row()) + "\n").encode("utf-8"))
    return hasher.hexdigest()


@dataclass(frozen=True)
class AccidentEvent:
    """
    Capacity loss on one link during [start_s, end_s).

    Attributes:
        link_id: Affected link
        position_m: Distance of the wreck from the start of the link
        start_s: First tick in effect
        end_s: First tick no longer in effect
        severity: Fraction of lanes lost at the downstream stop line
        blocked_green_s: Seconds at the start of every green during which the
            approach discharges nothing while queued vehicles merge past the wreck
    """
    link_id: int
    position_m: float
    start_s: int
    end_s: int
    severity: float
    blocked_green_s: int = 0

    def __post_init__(self):
        """Validate accident parameters."""
        if not 0 < self.severity <= 1:
            raise InvalidScenarioError(f"Accident severity must lie in (0, 1], got {self.severity}")
        if self.blocked_green_s < 0:
            raise InvalidScenarioError(
                f"Blocked green must be >= 0 s, got {self.blocked_green_s}")
        if self.start_s < 0 or self.start_s >= self.end_s:
            raise InvalidScenarioError(
                f"Accident window [{self.start_s}, {self.end_s}) is empty or negative")
        if self.position_m < 0:
            raise InvalidScenarioError("Accident position cannot be negative")

    def active_at(self, t_s: int) -> bool:
        return self.start_s <= t_s < self.end_s


@dataclass
class Scenario:
    """Network, demand parameters and accidents of one simulated world."""
    network: RoadNetwork
    flow_vph: float
    accidents: List[AccidentEvent] = field(default_factory=list)
    arrivals: ArrivalPattern = ArrivalPattern.FIXED
    saturation_rate: float = DEFAULT_SATURATION_RATE
    phase_offset: Optional[float] = None

    def validate(self) -> None:
        """
        Check accidents against the network.

        Raises:
            InvalidScenarioError: If an accident references a missing link or
                lies beyond the end of its link
        """
        if self.saturation_rate <= 0:
            raise InvalidScenarioError("saturation_rate must be positive")
        for accident in self.accidents:
            if not self.network.has_link(accident.link_id):
                raise InvalidScenarioError(f"Accident references unknown link {accident.link_id}")
            length = self.network.link(accident.link_id).length_m
            if accident.position_m > length:
                raise InvalidScenarioError(
                    f"Accident at {accident.position_m} m beyond link length {length} m")


@dataclass
class VehicleRecord:
    """Progress of one vehicle along its route."""
    id: int
    spawn_s: int
    route: Tuple[int, ...]
    entry_flow_vph: float
    entered_link_s: int
    exit_due_s: int
    leg: int = 0
    queued_since_s: Optional[int] = None
    accumulated_wait_s: int = 0
    done: bool = False

    @property
    def current_link(self) -> int:
        return self.route[self.leg]

    @property
    def is_queued(self) -> bool:
        return self.queued_since_s is not None


@dataclass
class TrafficState:
    """
    Complete mutable state of a simulation between ticks.

    Attributes:
        clock_s: Next tick to be simulated
        vehicles: All spawned vehicles by id
        queues: FIFO vehicle ids waiting at each approach stop line
        due: Vehicle ids finishing their current link traversal, by tick
        pending: Spawns not yet released
        service_credit: Fractional discharge credit per approach
        active_accidents: Indices of accidents in effect
        events: Event log
    """
    clock_s: int = 0
    vehicles: Dict[int, VehicleRecord] = field(default_factory=dict)
    queues: Dict[int, Deque[int]] = field(default_factory=dict)
    due: Dict[int, List[int]] = field(default_factory=dict)
    pending: Deque[SpawnEvent] = field(default_factory=deque)
    service_credit: Dict[int, float] = field(default_factory=dict)
    active_accidents: Set[int] = field(default_factory=set)
    events: List[SimEvent] = field(default_factory=list)
    completed: int = 0

    @classmethod
    def initial(cls, demand: Sequence[SpawnEvent]) -> "TrafficState":
        return cls(pending=deque(demand))

    @property
    def spawned(self) -> int:
        return len(self.vehicles)

    @property
    def queued(self) -> int:
        return sum(len(queue) for queue in self.queues.values())

    @property
    def in_transit(self) -> int:
        return sum(len(ids) for ids in self.due.values())

    def vehicle(self, vehicle_id: int) -> VehicleRecord:
        """
        Raises:
            UnknownVehicleError: If the vehicle has not spawned
        """
        try:
            return self.vehicles[vehicle_id]
        except KeyError:
            raise UnknownVehicleError(f"Vehicle {vehicle_id} does not exist")

    def mean_wait_s(self) -> float:
        if not self.vehicles:
            return 0.0
        return sum(v.accumulated_wait_s for v in self.vehicles.values()) / len(self.vehicles)

    def check_conservation(self) -> None:
        """
        Raises:
            TrafficError: If spawned != completed + in transit + queued
        """
        if self.spawned != self.completed + self.in_transit + self.queued:
            raise TrafficError(
                f"Vehicle conservation broken: {self.spawned} spawned, {self.completed} done, "
                f"{self.in_transit} in transit, {self.queued} queued")


def _effective_lanes(network: RoadNetwork, link_id: int, accidents: Sequence[AccidentEvent],
                     active: Set[int]) -> float:
    lanes = float(network.link(link_id).lanes)
    for index in active:
        accident = accidents[index]
        if accident.link_id == link_id:
            lanes *= 1.0 - accident.severity
    return lanes


def _blocked_green_s(link_id: int, accidents: Sequence[AccidentEvent], active: Set[int]) -> int:
    return max((accidents[index].blocked_green_s for index in active
                if accidents[index].link_id == link_id), default=0)


def _may_discharge(plan: SignalPlan, link_id: int, t_s: int, blocked_s: int) -> bool:
    elapsed = plan.green_elapsed_s(link_id, t_s)
    return elapsed is not None and elapsed >= blocked_s


def step(state: TrafficState, network: RoadNetwork, plan: SignalPlan,
         accidents: Sequence[AccidentEvent] = (),
         saturation_rate: float = DEFAULT_SATURATION_RATE) -> TrafficState:
    """
    Advance the simulation by one tick (1 s).

    Order within the tick: accident overlay, spawns, traversal completions
    (queue joins or exits), discharge of green approaches, wait accrual for
    everything still queued, clock increment.

    Args:
        state: State at the start of the tick, updated in place
        network: Road network
        plan: Signal plan in force for this tick
        accidents: Accidents of the scenario
        saturation_rate: Discharge rate in vehicles per second per effective lane

    Returns:
        The same state object, one tick later
    """
    t = state.clock_s
    log = state.events

    for index, accident in enumerate(accidents):
        active = accident.active_at(t)
        if active and index not in state.active_accidents:
            state.active_accidents.add(index)
            log.append(SimEvent(t, SimEventKind.ACCIDENT_ON, link_id=accident.link_id))
            logger.debug("t=%d accident on link %d", t, accident.link_id)
        elif not active and index in state.active_accidents:
            state.active_accidents.discard(index)
            log.append(SimEvent(t, SimEventKind.ACCIDENT_OFF, link_id=accident.link_id))
            logger.debug("t=%d accident cleared on link %d", t, accident.link_id)

    while state.pending and state.pending[0].t_s <= t:
        spawn = state.pending.popleft()
        vehicle_id = len(state.vehicles)
        first = network.link(spawn.route[0])
        record = VehicleRecord(
            id=vehicle_id,
            spawn_s=t,
            route=spawn.route,
            entry_flow_vph=spawn.flow_vph,
            entered_link_s=t,
            exit_due_s=t + first.traversal_s,
        )
        state.vehicles[vehicle_id] = record
        state.due.setdefault(record.exit_due_s, []).append(vehicle_id)
        log.append(SimEvent(t, SimEventKind.SPAWN, vehicle_id, first.id))

    for vehicle_id in sorted(state.due.pop(t, [])):
        record = state.vehicles[vehicle_id]
        link_id = record.current_link
        if record.leg == len(record.route) - 1:
            record.done = True
            state.completed += 1
            log.append(SimEvent(t, SimEventKind.EXIT, vehicle_id, link_id))
        else:
            state.queues.setdefault(link_id, deque()).append(vehicle_id)
            record.queued_since_s = t
            log.append(SimEvent(t, SimEventKind.QUEUE_JOIN, vehicle_id, link_id))

    for link_id in sorted(state.queues):
        queue = state.queues[link_id]
        blocked = _blocked_green_s(link_id, accidents, state.active_accidents)
        if not queue or not _may_discharge(plan, link_id, t, blocked):
            state.service_credit.pop(link_id, None)
            continue
        lanes = _effective_lanes(network, link_id, accidents, state.active_accidents)
        credit = state.service_credit.get(link_id, 0.0) + saturation_rate * lanes
        served = min(int(credit), len(queue))
        for _ in range(served):
            vehicle_id = queue.popleft()
            record = state.vehicles[vehicle_id]
            record.leg += 1
            record.queued_since_s = None
            record.entered_link_s = t
            record.exit_due_s = t + network.link(record.current_link).traversal_s
            state.due.setdefault(record.exit_due_s, []).append(vehicle_id)
            log.append(SimEvent(t, SimEventKind.DISCHARGE, vehicle_id, link_id))
        if queue:
            state.service_credit[link_id] = credit - served
        else:
            state.service_credit.pop(link_id, None)

    for queue in state.queues.values():
        for vehicle_id in queue:
            state.vehicles[vehicle_id].accumulated_wait_s += 1

    state.clock_s = t + 1
    return state


@dataclass(frozen=True)
class Snapshot:
    """Aggregate counters at a point in simulated time."""
    t_s: int
    spawned: int
    completed: int
    mean_wait_s: float


@dataclass
class SimResult:
    """
    Outcome of a simulation run.

    Attributes:
        horizon_s: Ticks simulated
        waits: Accumulated waiting time per spawned vehicle
        snapshots: Counters at plan changes and at the horizon
        events: Full event log
        samples: Counters every sample period, from t=0 to the horizon
    """
    horizon_s: int
    waits: Dict[int, int]
    snapshots: List[Snapshot]
    events: List[SimEvent]
    samples: List[Snapshot] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.waits)

    def digest(self) -> str:
        return event_digest(self.events)


class Simulation:
    """
    Tick-by-tick driver around step().

    Lets a caller inspect the state and swap signal plans between ticks.
    """

    def __init__(self, scenario: Scenario, plan: SignalPlan, horizon_s: int, seed: int,
                 sample_period_s: int = DEFAULT_SAMPLE_PERIOD_S):
        if horizon_s < 0:
            raise InvalidScenarioError(f"horizon_s must be >= 0, got {horizon_s}")
        if sample_period_s < 1:
            raise InvalidScenarioError(f"sample_period_s must be >= 1, got {sample_period_s}")
        scenario.validate()
        self.sample_period_s = sample_period_s
        self.scenario = scenario
        self.network = scenario.network
        self.plan = plan
        self.horizon_s = horizon_s
        demand: List[SpawnEvent] = []
        if horizon_s > 0:
            demand = generate_demand(scenario.network, scenario.flow_vph, horizon_s, seed,
                                     arrivals=scenario.arrivals,
                                     phase_offset=scenario.phase_offset)
        self.state = TrafficState.initial(demand)
        self.snapshots: List[Snapshot] = []
        self.samples: List[Snapshot] = [self.snapshot()]

    @property
    def clock_s(self) -> int:
        return self.state.clock_s

    @property
    def finished(self) -> bool:
        return self.state.clock_s >= self.horizon_s

    def snapshot(self) -> Snapshot:
        return Snapshot(self.state.clock_s, self.state.spawned, self.state.completed,
                        self.state.mean_wait_s())

    def set_plan(self, plan: SignalPlan) -> None:
        """Switch signal plans; the new plan governs from the next tick simulated."""
        self.plan = plan
        self.snapshots.append(self.snapshot())
        self.state.events.append(SimEvent(self.state.clock_s, SimEventKind.PLAN_CHANGE))
        logger.debug("Plan changed at t=%d", self.state.clock_s)

    def advance(self) -> None:
        """
        Simulate one tick.

        Raises:
            TrafficError: If the horizon has been reached
        """
        if self.finished:
            raise TrafficError(f"Simulation already reached its horizon of {self.horizon_s} s")
        step(self.state, self.network, self.plan, self.scenario.accidents,
             self.scenario.saturation_rate)
        if self.state.clock_s % self.sample_period_s == 0:
            self.samples.append(self.snapshot())

    def active_vehicles_on(self, link_ids: Set[int]) -> List[int]:
        """Ids of unfinished vehicles currently on any of the given links."""
        return sorted(
            record.id for record in self.state.vehicles.values()
            if not record.done and record.current_link in link_ids
        )

    def result(self) -> SimResult:
        self.state.check_conservation()
        snapshots = list(self.snapshots)
        snapshots.append(self.snapshot())
        waits = {vid: record.accumulated_wait_s for vid, record in self.state.vehicles.items()}
        return SimResult(self.horizon_s, waits, snapshots, list(self.state.events),
                         list(self.samples))


def run(scenario: Scenario, plan: SignalPlan, horizon_s: int, seed: int,
        plan_changes: Sequence[Tuple[int, SignalPlan]] = (),
        sample_period_s: int = DEFAULT_SAMPLE_PERIOD_S) -> SimResult:
    """
    Simulate a scenario from an empty network to the horizon.

    Args:
        scenario: Network, demand parameters and accidents
        plan: Initial signal plan
        horizon_s: Number of ticks to simulate
        seed: Demand seed
        plan_changes: (t_s, plan) pairs; each plan governs from tick t_s on
        sample_period_s: Ticks between mean-wait samples

    Returns:
        SimResult with per-vehicle waits, snapshots and event log

    Raises:
        InvalidScenarioError: If the scenario is inconsistent
    """
    simulation = Simulation(scenario, plan, horizon_s, seed, sample_period_s)
    schedule = sorted(plan_changes, key=lambda change: change[0])
    pending = deque(schedule)
    for t in range(horizon_s):
        while pending and pending[0][0] <= t:
            simulation.set_plan(pending.popleft()[1])
        simulation.advance()
    result = simulation.result()
    logger.debug("Run finished: %d vehicles, digest %s", result.n, result.digest()[:12])
    return result
