"""
Fixed-time signal plans and the data-driven split adjustment.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, Mapping, Optional, Tuple

from src.types import DataProduct
from src.traffic.network import (
    RoadNetwork, NodeId, PhaseGroup, TrafficError, UnknownLinkError,
)

logger = logging.getLogger(__name__)


class InvalidAdjustmentError(TrafficError):
    """Raised when an adjustment would leave a phase with less than 1 s of green."""
    pass


@dataclass(frozen=True)
class IntersectionTiming:
    """Two-phase fixed timing at one intersection. NS is served first in each cycle."""
    cycle_s: int
    green_ns_s: int
    green_ew_s: int
    offset_s: int = 0

    def __post_init__(self):
        """Validate timing invariants."""
        if self.green_ns_s < 1 or self.green_ew_s < 1:
            raise ValueError("Each phase needs at least 1 s of green")
        if self.green_ns_s + self.green_ew_s != self.cycle_s:
            raise ValueError(
                f"Greens {self.green_ns_s}+{self.green_ew_s} do not sum to cycle {self.cycle_s}")
        if not 0 <= self.offset_s < self.cycle_s:
            raise ValueError(f"Offset {self.offset_s} outside [0, {self.cycle_s})")

    def green(self, group: PhaseGroup) -> int:
        return self.green_ns_s if group is PhaseGroup.NS else self.green_ew_s

    def phase_at(self, t_s: int) -> PhaseGroup:
        """Phase group holding green at tick t_s."""
        if (t_s - self.offset_s) % self.cycle_s < self.green_ns_s:
            return PhaseGroup.NS
        return PhaseGroup.EW

    def green_elapsed_s(self, group: PhaseGroup, t_s: int) -> Optional[int]:
        """Seconds since the group's green began, or None while it is red."""
        into_cycle = (t_s - self.offset_s) % self.cycle_s
        if group is PhaseGroup.NS:
            return into_cycle if into_cycle < self.green_ns_s else None
        return into_cycle - self.green_ns_s if into_cycle >= self.green_ns_s else None


@dataclass(frozen=True)
class SignalPlan:
    """
    Timings for every intersection plus the approach map they apply to.

    Attributes:
        timings: Timing per intersection
        approaches: For each approach link, its intersection and phase group
    """
    timings: Mapping[NodeId, IntersectionTiming]
    approaches: Mapping[int, Tuple[NodeId, PhaseGroup]]

    @classmethod
    def fixed_time(cls, network: RoadNetwork, cycle_s: int = 60, green_ns_s: int = 30,
                   green_ew_s: int = 30, offset_step_s: int = 0) -> "SignalPlan":
        """
        Build a uniform fixed-time plan.

        Args:
            network: Network whose intersections are timed
            cycle_s: Cycle length
            green_ns_s: NS green
            green_ew_s: EW green
            offset_step_s: Offset added per column, giving a west-to-east green wave

        Returns:
            SignalPlan covering every intersection
        """
        timings: Dict[NodeId, IntersectionTiming] = {}
        for node in sorted(network.intersections):
            offset = (node[1] * offset_step_s) % cycle_s
            timings[node] = IntersectionTiming(cycle_s, green_ns_s, green_ew_s, offset)
        approaches = {
            link_id: (network.link(link_id).to_node, network.link(link_id).phase_group)
            for link_id in network.approaches
        }
        return cls(timings=timings, approaches=approaches)

    def is_green(self, link_id: int, t_s: int) -> bool:
        """
        Whether an approach link may discharge at tick t_s.

        Raises:
            UnknownLinkError: If the link is not an approach
        """
        return self.green_elapsed_s(link_id, t_s) is not None

    def green_elapsed_s(self, link_id: int, t_s: int) -> Optional[int]:
        """
        Seconds an approach has held green at tick t_s, None while red.

        Raises:
            UnknownLinkError: If the link is not an approach
        """
        try:
            node, group = self.approaches[link_id]
        except KeyError:
            raise UnknownLinkError(f"Link {link_id} is not a signalised approach")
        return self.timings[node].green_elapsed_s(group, t_s)

    def with_timing(self, node: NodeId, timing: IntersectionTiming) -> "SignalPlan":
        timings = dict(self.timings)
        timings[node] = timing
        return replace(self, timings=timings)


def apply_data_driven_adjustment(plan: SignalPlan, product: DataProduct,
                                 delta_s: int) -> SignalPlan:
    """
    Shift green toward the phase serving the accident approach.

    Only the intersection downstream of the accident link changes: its
    accident-side green gains delta_s and the other phase loses delta_s.
    The cycle length and offset stay the same.

    Args:
        plan: Current plan (left unchanged)
        product: Accident observation locating the link
        delta_s: Seconds of green moved between phases

    Returns:
        New plan with the adjusted intersection

    Raises:
        UnknownLinkError: If the product's link is not a signalised approach
        InvalidAdjustmentError: If either green would fall below 1 s
    """
    try:
        node, group = plan.approaches[product.link_id]
    except KeyError:
        raise UnknownLinkError(f"Link {product.link_id} is not a signalised approach")

    timing = plan.timings[node]
    if group is PhaseGroup.NS:
        green_ns, green_ew = timing.green_ns_s + delta_s, timing.green_ew_s - delta_s
    else:
        green_ns, green_ew = timing.green_ns_s - delta_s, timing.green_ew_s + delta_s
    if green_ns < 1 or green_ew < 1:
        raise InvalidAdjustmentError(
            f"Moving {delta_s} s at {node} leaves greens {green_ns}/{green_ew}")

    adjusted = replace(timing, green_ns_s=green_ns, green_ew_s=green_ew)
    logger.info("Adjusted %s toward %s: greens %d/%d", node, group.value, green_ns, green_ew)
    return plan.with_timing(node, adjusted)
