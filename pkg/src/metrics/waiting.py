"""
Average waiting time and its change between two runs.
"""

from dataclasses import dataclass
from decimal import Decimal
from typing import List, Tuple

from src.traffic.simulator import SimResult


class MetricsError(Exception):
    """Base error for metric computation."""
    pass


class EmptyPopulationError(MetricsError):
    """Raised when a run spawned no vehicles."""
    pass


def average_waiting_time(result: SimResult) -> float:
    """
    Mean accumulated waiting time over every spawned vehicle.

    Raises:
        EmptyPopulationError: If no vehicle spawned
    """
    if result.n == 0:
        raise EmptyPopulationError("No vehicles spawned; average waiting time is undefined")
    return sum(result.waits.values()) / result.n


def improvement_pct(phi_before: float, phi_after: float) -> float:
    """
    Relative reduction in average waiting time, positive when it fell.

    Returns 0.0 when both are zero and -inf when only phi_before is zero.
    """
    if phi_before == 0:
        return 0.0 if phi_after == 0 else float("-inf")
    return 100.0 * (phi_before - phi_after) / phi_before


@dataclass(frozen=True)
class MetricReport:
    """
    Waiting-time outcome of a treated run against its baseline.

    delta_phi is after minus before, so it is negative when waiting fell;
    improvement_pct is positive when waiting fell.
    """
    phi_baseline: float
    phi_treated: float
    delta_phi: float
    improvement_pct: float
    total_spend: Decimal = Decimal("0.00")
    trades: int = 0

    @property
    def phi(self) -> float:
        return self.phi_treated

    def with_market(self, total_spend: Decimal, trades: int) -> "MetricReport":
        return MetricReport(self.phi_baseline, self.phi_treated, self.delta_phi,
                            self.improvement_pct, total_spend, trades)


def delta_phi(baseline: SimResult, treated: SimResult) -> MetricReport:
    """
    Compare a treated run with its baseline.

    Args:
        baseline: Run without the data-driven adjustment
        treated: Run with it

    Returns:
        MetricReport without market fields

    Raises:
        EmptyPopulationError: If either run spawned no vehicles
    """
    phi_before = average_waiting_time(baseline)
    phi_after = average_waiting_time(treated)
    return MetricReport(
        phi_baseline=phi_before,
        phi_treated=phi_after,
        delta_phi=phi_after - phi_before,
        improvement_pct=improvement_pct(phi_before, phi_after),
    )


def waiting_series(baseline: SimResult, treated: SimResult) -> List[Tuple[int, float, float]]:
    """
    Running average waiting time of both runs at their common sample times.

    Each point is (t_s, baseline mean wait, treated mean wait) over the
    vehicles spawned by t_s.

    Raises:
        MetricsError: If the runs were sampled at different times
    """
    times = [s.t_s for s in baseline.samples]
    if times != [s.t_s for s in treated.samples]:
        raise MetricsError("Baseline and treated runs were sampled at different times")
    return [(b.t_s, b.mean_wait_s, a.mean_wait_s)
            for b, a in zip(baseline.samples, treated.samples)]
