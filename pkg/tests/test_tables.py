"""
Tests for aggregate sweep tables.
"""

import statistics
from decimal import Decimal
from src.types import RiskPreference, Sensitivity
from src.metrics.tables import (
    PriceValueRow, RunSummary, TradeSample, acceptance_table, price_dispersion,
    price_value_table,
)

AGG, CON = RiskPreference.AGGRESSIVE, RiskPreference.CONSERVATIVE
HIGH, LOW = Sensitivity.HIGH, Sensitivity.LOW


def summary(risk, sensitivity, flow, proposals, prices, improvement=5.0):
    trades = [TradeSample(Decimal(p), improvement) for p in prices]
    return RunSummary(risk, sensitivity, flow, proposals, len(trades), improvement, trades)


def test_acceptance_by_cell():
    """Test acceptance probability and mean price per cell."""
    rows = acceptance_table([
        summary(AGG, HIGH, 220.0, 3, ["10.00", "12.00"]),
        summary(AGG, HIGH, 220.0, 1, ["11.00"], improvement=7.0),
        summary(CON, LOW, 220.0, 3, []),
    ])
    assert len(rows) == 2
    first, second = rows
    assert (first.risk, first.sensitivity, first.flow_vph) == (AGG, HIGH, 220.0)
    assert first.accept_probability == 0.75
    assert first.mean_price == Decimal("11.00")
    assert first.mean_improvement_pct == 6.0
    assert second.accept_probability == 0.0
    assert second.mean_price == Decimal("0.00")


def test_cells_without_proposals_omitted():
    """Test that empty cells are left out."""
    assert acceptance_table([summary(CON, HIGH, 100.0, 0, [])]) == []


def test_price_value_rows():
    """Test one row per trade in run order."""
    rows = price_value_table([
        summary(AGG, LOW, 300.0, 2, ["5.00", "6.00"], improvement=3.0),
        summary(CON, HIGH, 300.0, 1, ["4.00"], improvement=1.0),
    ])
    assert [r.achieved_price for r in rows] == [Decimal("5.00"), Decimal("6.00"), Decimal("4.00")]
    assert rows[2] == PriceValueRow(Decimal("4.00"), 1.0, CON, HIGH)


def test_price_dispersion_quartiles():
    """Test the spread of prices in the best and worst quarters."""
    rows = [PriceValueRow(Decimal(p), float(i), AGG, HIGH)
            for i, p in enumerate(["1", "3", "5", "5", "8", "9", "2", "12"])]
    top, bottom = price_dispersion(rows)
    assert top == statistics.pstdev([2.0, 12.0])
    assert bottom == statistics.pstdev([1.0, 3.0])


def test_price_dispersion_small_inputs():
    """Test empty and single-trade inputs."""
    assert price_dispersion([]) == (0.0, 0.0)
    single = [PriceValueRow(Decimal("7"), 1.0, CON, LOW)]
    assert price_dispersion(single) == (0.0, 0.0)
