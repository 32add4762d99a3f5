"""
Tests for final pricing, utilities and the equilibrium check.
"""

import pytest
import random
from decimal import Decimal
from src.agents.profiles import ValueEstimate
from src.negotiation.pricing import (
    NoAgreementError, equilibrium_check, final_price, utilities,
)
from src.negotiation.protocol import immediate_agreement, negotiate

FEE = Decimal("1.00")


def D(value):
    return Decimal(str(value))


def agreed_at(price, floor=D("1.01"), ceiling=D(20)):
    return immediate_agreement("controller", "vehicle-1", D(price), floor, ceiling)


def failed():
    return negotiate("b", "s", D(25), D(2), D(20), D(5), max_rounds=2)


def test_final_price_blend():
    """Test the weighted blend of value and agreed price."""
    value = ValueEstimate.from_seconds(10)
    transcript = agreed_at(12)
    assert final_price(D("0.5"), value, transcript) == D("11.00")
    assert final_price(D(1), value, transcript) == D("10.00")
    assert final_price(D(0), value, transcript) == D("12.00")


def test_final_price_between_inputs():
    """Test that the blend stays between value and agreed price."""
    rng = random.Random(3)
    for _ in range(200):
        value = ValueEstimate.from_seconds(rng.uniform(0, 30))
        agreed = D(round(rng.uniform(0, 30), 2))
        w = D(round(rng.random(), 2))
        price = final_price(w, value, agreed_at(agreed))
        low = min(value.currency_value, agreed)
        high = max(value.currency_value, agreed)
        assert low <= price <= high


def test_final_price_errors():
    """Test failed negotiations and bad weights."""
    value = ValueEstimate.from_seconds(10)
    with pytest.raises(NoAgreementError):
        final_price(D("0.5"), value, failed())
    with pytest.raises(ValueError):
        final_price(D("1.5"), value, agreed_at(12))


def test_utilities():
    """Test payoffs with and without a trade."""
    report = utilities(agreed_at(12), ValueEstimate.from_seconds(10), D(12), FEE)
    assert (report.buyer_utility, report.seller_utility) == (D("-2.00"), D("12.00"))
    report = utilities(failed(), D(10), D(0), FEE)
    assert (report.buyer_utility, report.seller_utility) == (D("0.00"), D("-1.00"))
    assert utilities(agreed_at(10), D(10), D(10), FEE).buyer_utility == D("0.00")


def test_equilibrium_at_buyer_reservation():
    """Test that agreeing at the buyer's reservation is stable."""
    assert equilibrium_check(agreed_at(13, ceiling=D(13)), D(13), D("1.01"))


def test_equilibrium_rejects_price_above_reservation():
    """Test that an edited transcript beyond the buyer's value fails."""
    transcript = agreed_at(10)
    transcript.agreed_price = D(14)
    assert not equilibrium_check(transcript, D(13), D("1.01"))
    assert not equilibrium_check(agreed_at(14), D(13), D("1.01"))
    assert not equilibrium_check(agreed_at(1), D(13), D("1.01"))


def test_equilibrium_requires_agreement():
    """Test that failed transcripts raise."""
    with pytest.raises(NoAgreementError):
        equilibrium_check(failed(), D(10), D(1))


def best_response_table(price, buyer_value, seller_value, step):
    """Exhaustive unilateral deviations: True if the agreed price is a best response for both."""
    grid = []
    p = Decimal("0")
    while p <= max(buyer_value, seller_value, price):
        grid.append(p)
        p += step
    buyer_payoffs = {q: (buyer_value - q if q >= price else Decimal(0))
                     for q in grid if q <= buyer_value}
    seller_payoffs = {q: (q - seller_value if q <= price else Decimal(0))
                      for q in grid if q >= seller_value}
    buyer_best = max(list(buyer_payoffs.values()) + [Decimal(0)])
    seller_best = max(list(seller_payoffs.values()) + [Decimal(0)])
    return buyer_value - price >= buyer_best and price - seller_value >= seller_best


def test_equilibrium_matches_exhaustive_table():
    """Test the check against a brute-force best-response table on small instances."""
    rng = random.Random(9)
    step = D("0.25")
    for _ in range(300):
        floor = D(rng.randint(0, 8))
        ceiling = D(rng.randint(0, 12))
        opening_ask = floor + D(rng.randint(0, 6))
        opening_bid = D(rng.randint(0, 6))
        transcript = negotiate("b", "s", opening_ask, opening_bid, floor, ceiling,
                               rng.randint(1, 6), D(rng.choice(["0.5", "1"])))
        if not transcript.agreed:
            continue
        buyer_value = ceiling + D(rng.choice([-1, 0, 0, 1]))
        seller_value = floor + D(rng.choice([-1, 0, 0, 1]))
        expected = best_response_table(transcript.agreed_price, buyer_value, seller_value, step)
        assert equilibrium_check(transcript, buyer_value, seller_value, step) == expected


def test_every_policy_agreement_is_stable():
    """Test that agreements within both reservations pass the check."""
    rng = random.Random(21)
    for _ in range(200):
        floor = D(round(rng.uniform(1, 5), 2))
        ceiling = floor + D(round(rng.uniform(0, 15), 2))
        transcript = negotiate("b", "s", ceiling + D(rng.randint(0, 5)), D(0), floor, ceiling,
                               max_rounds=40, concession_step=D("1"))
        assert transcript.agreed
        assert equilibrium_check(transcript, ceiling, floor, D("0.05"))
