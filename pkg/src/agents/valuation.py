"""
Evidence-based data valuation by twin simulation.

The value of an accident report is the drop in average waiting time
between a run that keeps the base plan and a run that applies the
data-driven adjustment from the trade time on.
"""

import logging
from typing import Dict, Optional, Tuple

from src.types import DataProduct
from src.traffic.network import InvalidScenarioError
from src.traffic.signals import SignalPlan, apply_data_driven_adjustment
from src.traffic.simulator import Scenario, SimResult, run
from src.metrics.waiting import EmptyPopulationError, average_waiting_time
from src.agents.profiles import ValueEstimate, ValueMethod

logger = logging.getLogger(__name__)


def oracle_twin(scenario: Scenario, plan: SignalPlan, product: DataProduct, trade_time_s: int,
                horizon_s: int, delta_s: int, seed: int = 0,
                baseline: Optional[SimResult] = None) -> Tuple[SimResult, SimResult]:
    """
    Run the baseline and adjusted twins.

    Args:
        scenario: Simulated world
        plan: Base signal plan
        product: Accident report locating the adjusted intersection
        trade_time_s: Tick from which the adjusted plan governs
        horizon_s: Simulation horizon
        delta_s: Seconds of green moved toward the accident approach
        seed: Demand seed shared by both twins
        baseline: Previously computed baseline run to reuse

    Returns:
        (baseline result, adjusted result)

    Raises:
        InvalidScenarioError: If trade_time_s is not before the horizon or
            the product's link is unknown
    """
    if not 0 <= trade_time_s < horizon_s:
        raise InvalidScenarioError(
            f"Trade time {trade_time_s} s must lie in [0, {horizon_s})")
    if not scenario.network.has_link(product.link_id):
        raise InvalidScenarioError(f"Product references unknown link {product.link_id}")

    adjusted_plan = apply_data_driven_adjustment(plan, product, delta_s)
    if baseline is None:
        baseline = run(scenario, plan, horizon_s, seed)
    adjusted = run(scenario, plan, horizon_s, seed, plan_changes=[(trade_time_s, adjusted_plan)])
    return baseline, adjusted


def seconds_saved(baseline: SimResult, adjusted: SimResult) -> float:
    """Clamped drop in average waiting time; 0 when nobody travelled."""
    try:
        return max(0.0, average_waiting_time(baseline) - average_waiting_time(adjusted))
    except EmptyPopulationError:
        return 0.0


def oracle_value(scenario: Scenario, plan: SignalPlan, product: DataProduct, trade_time_s: int,
                 horizon_s: int, delta_s: int, seed: int = 0, conversion_rate: float = 1.0,
                 baseline: Optional[SimResult] = None) -> ValueEstimate:
    """
    Value a product as the waiting time its adjustment saves.

    Returns:
        ValueEstimate with method ORACLE and basis_s = trade_time_s

    Raises:
        InvalidScenarioError: See oracle_twin
    """
    base, adjusted = oracle_twin(scenario, plan, product, trade_time_s, horizon_s, delta_s,
                                 seed, baseline)
    saved = seconds_saved(base, adjusted)
    logger.debug("Oracle link %d at t=%d delta %d: %.3f s saved",
                 product.link_id, trade_time_s, delta_s, saved)
    return ValueEstimate.from_seconds(saved, conversion_rate, ValueMethod.ORACLE, trade_time_s)


class OracleCache:
    """
    Memoized oracle for one (scenario, base plan, horizon, seed).

    Twins are keyed by (link, trade time, delta); the baseline run is
    computed once and shared.
    """

    def __init__(self, scenario: Scenario, plan: SignalPlan, horizon_s: int, seed: int,
                 conversion_rate: float = 1.0, baseline: Optional[SimResult] = None):
        self.scenario = scenario
        self.plan = plan
        self.horizon_s = horizon_s
        self.seed = seed
        self.conversion_rate = conversion_rate
        self._baseline = baseline
        self._values: Dict[Tuple[int, int, int], ValueEstimate] = {}

    @property
    def baseline(self) -> SimResult:
        if self._baseline is None:
            self._baseline = run(self.scenario, self.plan, self.horizon_s, self.seed)
        return self._baseline

    def value(self, product: DataProduct, trade_time_s: int, delta_s: int) -> ValueEstimate:
        key = (product.link_id, trade_time_s, delta_s)
        if key not in self._values:
            self._values[key] = oracle_value(
                self.scenario, self.plan, product, trade_time_s, self.horizon_s, delta_s,
                seed=self.seed, conversion_rate=self.conversion_rate, baseline=self.baseline)
        return self._values[key]

    def __len__(self) -> int:
        return len(self._values)
