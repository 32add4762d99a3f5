"""
Vehicle demand generation.

Every entry link carries the same flow. Vehicles take the shortest route to
the boundary opposite their entry.
"""

import logging
import random
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from src.traffic.network import RoadNetwork, InvalidScenarioError

logger = logging.getLogger(__name__)


class ArrivalPattern(Enum):
    """How spawn times are spaced on an entry."""
    FIXED = "fixed"
    POISSON = "poisson"


@dataclass(frozen=True)
class SpawnEvent:
    """A vehicle entering the network."""
    t_s: int
    entry_link: int
    route: Tuple[int, ...]
    flow_vph: float


def _entry_rng(seed: int, entry_id: int) -> random.Random:
    # string seeds are hashed with sha512, stable across interpreter runs
    return random.Random(f"{seed}:{entry_id}")


def generate_demand(network: RoadNetwork, flow_vph: float, horizon_s: int, seed: int,
                    arrivals: ArrivalPattern = ArrivalPattern.FIXED,
                    phase_offset: Optional[float] = None) -> List[SpawnEvent]:
    """
    Generate spawn events for every entry link over the horizon.

    With fixed arrivals, entry spawns fall at offset + k * 3600 / flow_vph,
    where the offset is drawn uniformly from [0, headway) per entry.
    Poisson arrivals draw exponential gaps at the same mean rate.

    Args:
        network: Road network providing entries and routes
        flow_vph: Vehicles per hour on each entry
        horizon_s: Only spawns strictly before this tick are produced
        seed: Seed for per-entry offsets and Poisson gaps
        arrivals: Arrival pattern
        phase_offset: Fixed offset for every entry instead of a random one

    Returns:
        Spawn events sorted by (t_s, entry_link)

    Raises:
        InvalidScenarioError: If flow is negative or horizon not positive
    """
    if flow_vph < 0:
        raise InvalidScenarioError(f"flow_vph must be >= 0, got {flow_vph}")
    if horizon_s <= 0:
        raise InvalidScenarioError(f"horizon_s must be > 0, got {horizon_s}")
    if flow_vph == 0:
        return []

    headway = 3600.0 / flow_vph
    events: List[SpawnEvent] = []

    for entry_id in network.entries:
        route = network.route_for(entry_id)
        rng = _entry_rng(seed, entry_id)

        if arrivals is ArrivalPattern.FIXED:
            offset = rng.uniform(0.0, headway) if phase_offset is None else phase_offset
            k = 0
            while offset + k * headway < horizon_s:
                events.append(SpawnEvent(int(offset + k * headway), entry_id, route, flow_vph))
                k += 1
        else:
            t = rng.expovariate(flow_vph / 3600.0)
            while t < horizon_s:
                events.append(SpawnEvent(int(t), entry_id, route, flow_vph))
                t += rng.expovariate(flow_vph / 3600.0)

    events.sort(key=lambda event: (event.t_s, event.entry_link))
    logger.debug("Generated %d spawns (%s, %.1f veh/h, seed %d)",
                 len(events), arrivals.value, flow_vph, seed)
    return events
