"""
Accident observation by connected vehicles.
"""

from typing import Optional, Sequence

from src.types import DataProduct
from src.traffic.network import RoadNetwork
from src.traffic.simulator import AccidentEvent, TrafficState

DEFAULT_RADIUS_M = 250.0


def vehicle_position_m(state: TrafficState, network: RoadNetwork, vehicle_id: int) -> float:
    """
    Approximate distance of a vehicle from the start of its current link.

    Queued vehicles stand at the stop line; vehicles in transit advance
    linearly over their traversal time.

    Raises:
        UnknownVehicleError: If the vehicle does not exist
    """
    record = state.vehicle(vehicle_id)
    link = network.link(record.current_link)
    if record.is_queued:
        return link.length_m
    elapsed = state.clock_s - record.entered_link_s
    travel = max(1, record.exit_due_s - record.entered_link_s)
    return link.length_m * min(1.0, elapsed / travel)


def observe_accident(state: TrafficState, network: RoadNetwork, vehicle_id: int,
                     accidents: Sequence[AccidentEvent],
                     radius_m: float = DEFAULT_RADIUS_M) -> Optional[DataProduct]:
    """
    Produce a data product if the vehicle can see an active accident.

    A vehicle sees an accident when it is on the accident link, within
    radius_m of the accident position, while the accident is active at the
    current clock.

    Args:
        state: Simulation state
        network: Road network
        vehicle_id: Observing vehicle
        accidents: Scenario accidents, checked in order
        radius_m: Observation radius

    Returns:
        DataProduct for the first visible accident, or None

    Raises:
        UnknownVehicleError: If the vehicle does not exist
    """
    record = state.vehicle(vehicle_id)
    if record.done:
        return None
    for accident in accidents:
        if accident.link_id != record.current_link or not accident.active_at(state.clock_s):
            continue
        position = vehicle_position_m(state, network, vehicle_id)
        if abs(position - accident.position_m) <= radius_m:
            return DataProduct(
                link_id=accident.link_id,
                position_m=accident.position_m,
                observed_at_s=state.clock_s,
                severity=accident.severity,
                observed_flow_vph=record.entry_flow_vph,
            )
    return None
