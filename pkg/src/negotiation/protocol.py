"""
Alternating-offers negotiation with a fixed concession step.

Each round the seller lowers its ask and the buyer raises its bid by the
step, each clamped at its own reservation price. The first round in which
the bid reaches the ask ends in agreement at the midpoint.
"""

import logging
from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_UP
from enum import Enum
from typing import List, Optional

from src.utils import CENT, to_money
from src.agents.profiles import AgentProfile, ValueEstimate
from src.agents.policy import PolicyParams, buyer_reservation, seller_reservation

logger = logging.getLogger(__name__)

DEFAULT_MAX_ROUNDS = 5
DEFAULT_CONCESSION_STEP = Decimal("1.00")


class NegotiationError(Exception):
    """Base error for negotiation."""
    pass


class Outcome(Enum):
    AGREED = "agreed"
    FAILED = "failed"


@dataclass(frozen=True)
class NegotiationRound:
    """Offers exchanged in one round and whether each side accepts the other's."""
    round: int
    ask: Decimal
    bid: Decimal
    buyer_decision: bool
    seller_decision: bool


@dataclass
class NegotiationTranscript:
    """
    Full record of one negotiation.

    Attributes:
        buyer_id: Buying agent
        seller_id: Selling agent
        max_rounds: Round limit in force
        seller_reservation: Lowest price the seller accepts
        buyer_reservation: Highest price the buyer accepts
        rounds: Rounds played, numbered from 1
        outcome: AGREED or FAILED
        agreed_price: Midpoint of the crossing round, when agreed
    """
    buyer_id: str
    seller_id: str
    max_rounds: int
    seller_reservation: Decimal
    buyer_reservation: Decimal
    rounds: List[NegotiationRound] = field(default_factory=list)
    outcome: Outcome = Outcome.FAILED
    agreed_price: Optional[Decimal] = None

    @property
    def agreed(self) -> bool:
        return self.outcome is Outcome.AGREED

    @property
    def final_round(self) -> Optional[NegotiationRound]:
        return self.rounds[-1] if self.rounds else None

    def is_monotone(self) -> bool:
        """Asks never rise and bids never fall from one round to the next."""
        return all(
            later.ask <= earlier.ask and later.bid >= earlier.bid
            for earlier, later in zip(self.rounds, self.rounds[1:])
        )


def _midpoint(ask: Decimal, bid: Decimal) -> Decimal:
    return ((ask + bid) / 2).quantize(CENT, rounding=ROUND_HALF_UP)


def negotiate(buyer_id: str, seller_id: str, opening_ask: Decimal, opening_bid: Decimal,
              seller_floor: Decimal, buyer_ceiling: Decimal,
              max_rounds: int = DEFAULT_MAX_ROUNDS,
              concession_step: Decimal = DEFAULT_CONCESSION_STEP) -> NegotiationTranscript:
    """
    Play the concession protocol from explicit opening stances and reservations.

    An opening stance already past its reservation is held, never moved
    back toward it.

    Args:
        buyer_id: Buying agent
        seller_id: Selling agent
        opening_ask: Seller's stance before round 1
        opening_bid: Buyer's stance before round 1
        seller_floor: Seller reservation
        buyer_ceiling: Buyer reservation
        max_rounds: Round limit (>= 1)
        concession_step: Amount each side concedes per round (> 0)

    Returns:
        Transcript, agreed or failed

    Raises:
        ValueError: If max_rounds < 1 or concession_step <= 0
    """
    if max_rounds < 1:
        raise ValueError(f"max_rounds must be >= 1, got {max_rounds}")
    step = to_money(concession_step)
    if step <= 0:
        raise ValueError(f"concession_step must be positive, got {concession_step}")

    transcript = NegotiationTranscript(
        buyer_id=buyer_id,
        seller_id=seller_id,
        max_rounds=max_rounds,
        seller_reservation=to_money(seller_floor),
        buyer_reservation=to_money(buyer_ceiling),
    )
    ask, bid = to_money(opening_ask), to_money(opening_bid)

    for number in range(1, max_rounds + 1):
        if ask > transcript.seller_reservation:
            ask = max(transcript.seller_reservation, ask - step)
        if bid < transcript.buyer_reservation:
            bid = min(transcript.buyer_reservation, bid + step)
        crossed = bid >= ask
        transcript.rounds.append(NegotiationRound(number, ask, bid, crossed, crossed))
        logger.debug("%s/%s round %d: ask %s bid %s", seller_id, buyer_id, number, ask, bid)
        if crossed:
            transcript.outcome = Outcome.AGREED
            transcript.agreed_price = _midpoint(ask, bid)
            break

    return transcript


def run_negotiation(buyer: AgentProfile, buyer_value: ValueEstimate, seller: AgentProfile,
                    opening_ask: Decimal, max_rounds: int = DEFAULT_MAX_ROUNDS,
                    concession_step: Decimal = DEFAULT_CONCESSION_STEP,
                    params: PolicyParams = PolicyParams()) -> NegotiationTranscript:
    """
    Negotiate a rejected offer between the controller and a seller.

    The buyer opens at half its reservation, the rule-policy acceptance
    threshold; the seller's reservation is one cent above the proposal fee.

    Returns:
        Transcript of the negotiation
    """
    ceiling = buyer_reservation(buyer, buyer_value, params)
    transcript = negotiate(
        buyer_id=buyer.id,
        seller_id=seller.id,
        opening_ask=opening_ask,
        opening_bid=(ceiling / 2).quantize(CENT, rounding=ROUND_HALF_UP),
        seller_floor=seller_reservation(params),
        buyer_ceiling=ceiling,
        max_rounds=max_rounds,
        concession_step=concession_step,
    )
    logger.info("Negotiation %s -> %s %s after %d rounds", seller.id, buyer.id,
                transcript.outcome.value, len(transcript.rounds))
    return transcript


def immediate_agreement(buyer_id: str, seller_id: str, price: Decimal,
                        seller_floor: Decimal, buyer_ceiling: Decimal) -> NegotiationTranscript:
    """One-round agreed transcript for an offer accepted as posted."""
    price = to_money(price)
    transcript = NegotiationTranscript(
        buyer_id=buyer_id,
        seller_id=seller_id,
        max_rounds=1,
        seller_reservation=to_money(seller_floor),
        buyer_reservation=to_money(buyer_ceiling),
        rounds=[NegotiationRound(1, price, price, True, True)],
        outcome=Outcome.AGREED,
        agreed_price=price,
    )
    return transcript
