"""
Aggregate tables over many runs: acceptance by preference and price versus value.
"""

import statistics
from collections import OrderedDict
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Dict, List, Sequence, Tuple

from src.types import RiskPreference, Sensitivity
from src.utils import to_money


@dataclass(frozen=True)
class TradeSample:
    """Achieved price of one settled trade and the run's improvement."""
    price: Decimal
    improvement_pct: float


@dataclass
class RunSummary:
    """Per-run inputs to the aggregate tables."""
    risk: RiskPreference
    sensitivity: Sensitivity
    flow_vph: float
    proposals: int
    accepted: int
    improvement_pct: float
    trades: List[TradeSample] = field(default_factory=list)


@dataclass(frozen=True)
class AcceptanceRow:
    risk: RiskPreference
    sensitivity: Sensitivity
    flow_vph: float
    accept_probability: float
    mean_price: Decimal
    mean_improvement_pct: float


@dataclass(frozen=True)
class PriceValueRow:
    achieved_price: Decimal
    improvement_pct: float
    risk: RiskPreference
    sensitivity: Sensitivity


def acceptance_table(runs: Sequence[RunSummary]) -> List[AcceptanceRow]:
    """
    Acceptance probability per (risk, sensitivity, flow) cell.

    Cells keep the order in which they first appear in runs; cells without
    proposals are left out.

    Args:
        runs: Run summaries

    Returns:
        One row per cell with at least one proposal
    """
    cells: Dict[Tuple[RiskPreference, Sensitivity, float], List[RunSummary]] = OrderedDict()
    for summary in runs:
        cells.setdefault((summary.risk, summary.sensitivity, summary.flow_vph), []).append(summary)

    rows = []
    for (risk, sensitivity, flow), members in cells.items():
        proposals = sum(m.proposals for m in members)
        if proposals == 0:
            continue
        accepted = sum(m.accepted for m in members)
        prices = [t.price for m in members for t in m.trades]
        mean_price = to_money(sum(prices, Decimal("0")) / len(prices)) if prices else Decimal("0.00")
        rows.append(AcceptanceRow(
            risk=risk,
            sensitivity=sensitivity,
            flow_vph=flow,
            accept_probability=accepted / proposals,
            mean_price=mean_price,
            mean_improvement_pct=statistics.fmean(m.improvement_pct for m in members),
        ))
    return rows


def price_value_table(runs: Sequence[RunSummary]) -> List[PriceValueRow]:
    """One row per settled trade across all runs, in run order."""
    return [
        PriceValueRow(trade.price, trade.improvement_pct, summary.risk, summary.sensitivity)
        for summary in runs
        for trade in summary.trades
    ]


def price_dispersion(rows: Sequence[PriceValueRow]) -> Tuple[float, float]:
    """
    Spread of achieved prices among the best and worst trades.

    Trades are ranked by improvement_pct; the top and bottom quarters (at
    least one trade each) are compared by population standard deviation
    of price.

    Returns:
        (std of top-quartile prices, std of bottom-quartile prices);
        (0.0, 0.0) for no rows
    """
    if not rows:
        return 0.0, 0.0
    ranked = sorted(rows, key=lambda r: (r.improvement_pct, r.achieved_price))
    size = max(1, len(ranked) // 4)
    bottom = [float(r.achieved_price) for r in ranked[:size]]
    top = [float(r.achieved_price) for r in ranked[-size:]]
    return statistics.pstdev(top), statistics.pstdev(bottom)
