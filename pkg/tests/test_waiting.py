"""
Tests for waiting-time metrics.
"""

import math
import pytest
from decimal import Decimal
from src.metrics.waiting import (
    EmptyPopulationError, MetricReport, MetricsError, average_waiting_time, delta_phi,
    improvement_pct, waiting_series,
)
from src.traffic.simulator import SimResult, Snapshot


def result(waits):
    return SimResult(horizon_s=100, waits=dict(enumerate(waits)), snapshots=[], events=[])


def test_average_waiting_time():
    """Test the mean over every spawned vehicle, including zero waits."""
    assert average_waiting_time(result([24, 0, 0, 24])) == 12.0


def test_empty_population():
    """Test that an empty run has no average."""
    with pytest.raises(EmptyPopulationError):
        average_waiting_time(result([]))


def test_improvement_pct():
    """Test relative improvement and its degenerate cases."""
    assert improvement_pct(20.0, 15.0) == 25.0
    assert improvement_pct(20.0, 25.0) == -25.0
    assert improvement_pct(0.0, 0.0) == 0.0
    assert math.isinf(improvement_pct(0.0, 1.0)) and improvement_pct(0.0, 1.0) < 0


def test_delta_phi_report():
    """Test the comparison of a treated run with its baseline."""
    report = delta_phi(result([20, 20]), result([10, 20]))
    assert report.phi_baseline == 20.0
    assert report.phi_treated == 15.0
    assert report.phi == 15.0
    assert report.delta_phi == -5.0
    assert report.improvement_pct == 25.0


def test_with_market():
    """Test attaching spend and trade count."""
    report = MetricReport(10.0, 9.0, -1.0, 10.0).with_market(Decimal("36.00"), 3)
    assert report.total_spend == Decimal("36.00")
    assert report.trades == 3
    assert report.phi_treated == 9.0


def sampled(points):
    samples = [Snapshot(t, 10, 0, wait) for t, wait in points]
    return SimResult(horizon_s=points[-1][0], waits={}, snapshots=[], events=[], samples=samples)


def test_waiting_series_pairs_samples():
    """Test that both curves are aligned on their sample times."""
    baseline = sampled([(0, 0.0), (10, 4.0), (20, 9.5)])
    treated = sampled([(0, 0.0), (10, 4.0), (20, 6.0)])
    assert waiting_series(baseline, treated) == [(0, 0.0, 0.0), (10, 4.0, 4.0), (20, 9.5, 6.0)]
    with pytest.raises(MetricsError):
        waiting_series(baseline, sampled([(0, 0.0), (15, 1.0), (20, 2.0)]))
