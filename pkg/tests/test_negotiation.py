"""
Tests for the concession protocol.
"""

import pytest
import math
import random
from decimal import Decimal
from src.types import Role, RiskPreference, Sensitivity
from src.agents.policy import buyer_reservation, seller_reservation
from src.agents.profiles import AgentProfile, ValueEstimate
from src.negotiation.pricing import equilibrium_check
from src.negotiation.protocol import (
    Outcome, immediate_agreement, negotiate, run_negotiation,
)

BUYER = AgentProfile("controller", Role.CONTROLLER, RiskPreference.CONSERVATIVE,
                     Sensitivity.HIGH, Decimal("100"))
SELLER = AgentProfile("vehicle-1", Role.VEHICLE, RiskPreference.CONSERVATIVE,
                      Sensitivity.HIGH, Decimal("30"))


def D(value):
    return Decimal(str(value))


def test_disjoint_reservations_fail():
    """Test that a seller floor above the buyer ceiling never agrees."""
    transcript = negotiate("b", "s", D(25), D(2.5), seller_floor=D(20), buyer_ceiling=D(5),
                           max_rounds=3, concession_step=D(1))
    assert transcript.outcome is Outcome.FAILED
    assert transcript.agreed_price is None
    assert len(transcript.rounds) == 3


def test_equal_openings_agree_at_once():
    """Test agreement in round 1 at the common opening price."""
    transcript = negotiate("b", "s", D(10), D(10), D("1.01"), D(13))
    assert transcript.agreed
    assert len(transcript.rounds) == 1
    assert transcript.agreed_price == D("10.00")


def test_conservative_buyer_reference_case():
    """Test the crossing for a buyer valuing the data at 10 and an ask of 11."""
    transcript = run_negotiation(BUYER, ValueEstimate.from_seconds(10), SELLER, D(11))
    assert [(r.ask, r.bid) for r in transcript.rounds] == [
        (D(10), D(6)), (D(9), D(7)), (D(8), D(8))]
    assert transcript.agreed_price == D("8.00")
    assert D("1.01") <= transcript.agreed_price <= D(10)
    assert transcript.final_round.buyer_decision and transcript.final_round.seller_decision


def test_reservations_clamp_concessions():
    """Test that neither side moves past its reservation."""
    transcript = negotiate("b", "s", D(12), D(0), D(11.5), D(1.5), max_rounds=5,
                           concession_step=D(1))
    assert all(r.ask >= D(11.5) and r.bid <= D(1.5) for r in transcript.rounds)
    assert transcript.rounds[-1].ask == D(11.5)
    assert transcript.rounds[-1].bid == D(1.5)


def test_brute_force_completeness_and_monotonicity():
    """Test termination, monotone offers and agreement exactly when reachable."""
    for floor in range(0, 7):
        for ceiling in range(0, 7):
            for ask_above in range(0, 6):
                for opening_bid in range(0, ceiling + 1):
                    for step in (D("0.5"), D(1)):
                        for max_rounds in range(1, 5):
                            opening_ask = floor + ask_above
                            transcript = negotiate("b", "s", D(opening_ask), D(opening_bid),
                                                   D(floor), D(ceiling), max_rounds, step)
                            assert 1 <= len(transcript.rounds) <= max_rounds
                            assert transcript.is_monotone()
                            if floor > ceiling:
                                assert not transcript.agreed
                                continue
                            gap = max(0, opening_ask - opening_bid)
                            if max_rounds >= math.ceil(gap / step):
                                assert transcript.agreed
                            if transcript.agreed:
                                assert D(floor) <= transcript.agreed_price <= D(ceiling)
                                last = transcript.final_round
                                assert last.bid >= last.ask


def test_cent_grid_reservations():
    """Test agreement, concession and equilibrium over reservations on a cent grid."""
    opening_ask, opening_bid = D("3.00"), D("0.50")
    step, max_rounds = D("0.25"), 6
    cents = [Decimal(n) / 100 for n in range(100)]
    agreed = failed = 0
    for floor in (D("1.00") + c for c in cents):
        for ceiling in (D("1.50") + c for c in cents):
            transcript = negotiate("b", "s", opening_ask, opening_bid, floor, ceiling,
                                   max_rounds, step)
            assert transcript.is_monotone()
            reachable = floor <= ceiling and any(
                min(ceiling, opening_bid + step * r) >= max(floor, opening_ask - step * r)
                for r in range(1, max_rounds + 1))
            assert transcript.agreed == reachable
            if transcript.agreed:
                agreed += 1
                assert floor <= transcript.agreed_price <= ceiling
                assert equilibrium_check(transcript, ceiling, floor)
            else:
                failed += 1
    assert agreed and failed


def test_run_negotiation_uses_policy_reservations():
    """Test that run_negotiation derives reservations from the rule policy."""
    value = ValueEstimate.from_seconds(12)
    aggressive = AgentProfile("controller", Role.CONTROLLER, RiskPreference.AGGRESSIVE,
                              Sensitivity.HIGH, Decimal("100"))
    transcript = run_negotiation(aggressive, value, SELLER, D(30), max_rounds=3)
    assert transcript.buyer_reservation == buyer_reservation(aggressive, value) == D("15.60")
    assert transcript.seller_reservation == seller_reservation() == D("1.01")
    assert transcript.rounds[0].bid == D("8.80")


def test_random_transcripts_monotone():
    """Test monotone concession on randomized run_negotiation calls."""
    rng = random.Random(5)
    for _ in range(300):
        value = ValueEstimate.from_seconds(rng.uniform(0, 30))
        ask = D(round(rng.uniform(1.01, 40), 2))
        transcript = run_negotiation(BUYER, value, SELLER, ask, rng.randint(1, 6),
                                     D(rng.choice(["0.25", "0.5", "1.00", "2.00"])))
        assert transcript.is_monotone()
        assert len(transcript.rounds) <= transcript.max_rounds


def test_immediate_agreement():
    """Test the one-round record of an accepted offer."""
    transcript = immediate_agreement("controller", "vehicle-1", D(12), D("1.01"), D(13))
    assert transcript.agreed
    assert transcript.agreed_price == D("12.00")
    assert len(transcript.rounds) == 1


@pytest.mark.parametrize("max_rounds,step", [(0, D(1)), (3, D(0)), (3, D(-1))])
def test_invalid_parameters(max_rounds, step):
    """Test argument validation."""
    with pytest.raises(ValueError):
        negotiate("b", "s", D(10), D(5), D(1), D(10), max_rounds, step)
