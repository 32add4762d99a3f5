"""
Final pricing, utilities and the equilibrium check for negotiated trades.
"""

from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP
from typing import Iterator, Union

from src.utils import CENT, to_money
from src.agents.profiles import ValueEstimate
from src.negotiation.protocol import NegotiationError, NegotiationTranscript

DEFAULT_WEIGHT = Decimal("0.5")


class NoAgreementError(NegotiationError):
    """Raised when a priced outcome is requested from a failed negotiation."""
    pass


@dataclass(frozen=True)
class UtilityReport:
    buyer_utility: Decimal
    seller_utility: Decimal


def _require_agreement(transcript: NegotiationTranscript) -> Decimal:
    if not transcript.agreed or transcript.agreed_price is None:
        raise NoAgreementError(
            f"Negotiation {transcript.seller_id} -> {transcript.buyer_id} did not agree")
    return transcript.agreed_price


def final_price(w: Decimal, value: ValueEstimate, transcript: NegotiationTranscript) -> Decimal:
    """
    Blend the data value with the negotiated price.

    P = w * value + (1 - w) * agreed price, rounded to the cent.

    Args:
        w: Weight of the value term, in [0, 1]
        value: Buyer's value estimate
        transcript: Agreed negotiation

    Returns:
        Final price

    Raises:
        NoAgreementError: If the negotiation failed
        ValueError: If w lies outside [0, 1]
    """
    w = Decimal(str(w))
    if not 0 <= w <= 1:
        raise ValueError(f"Weight must lie in [0, 1], got {w}")
    agreed = _require_agreement(transcript)
    blended = w * value.currency_value + (1 - w) * agreed
    return blended.quantize(CENT, rounding=ROUND_HALF_UP)


def utilities(transcript: NegotiationTranscript, buyer_value: Union[ValueEstimate, Decimal],
              price: Decimal, fee: Decimal) -> UtilityReport:
    """
    Payoffs of both sides.

    With a trade the buyer gets value minus price and the seller the price;
    without one the buyer gets 0 and the seller loses the sunk fee.
    """
    if isinstance(buyer_value, ValueEstimate):
        buyer_value = buyer_value.currency_value
    if transcript.agreed:
        return UtilityReport(to_money(buyer_value - price), to_money(price))
    return UtilityReport(Decimal("0.00"), -to_money(fee))


def _grid(low: Decimal, high: Decimal, step: Decimal) -> Iterator[Decimal]:
    price = low
    while price <= high:
        yield price
        price += step


def equilibrium_check(transcript: NegotiationTranscript, buyer_value: Decimal,
                      seller_value: Decimal, price_grid_step: Decimal = CENT) -> bool:
    """
    Check that neither side gains by deviating from the agreed price.

    Each side's surplus is measured against its own value: buyer_value - p
    for the buyer, p - seller_value for the seller, zero without a trade.
    A deviation is any other price on the grid within the deviator's
    reservation interval; the other side holds its final stance, accepting
    only prices at least as good for it as the agreed one, and walks away
    otherwise. The agreed price must also lie between the final ask and bid.

    Args:
        transcript: Agreed negotiation
        buyer_value: Buyer's willingness to pay
        seller_value: Seller's lowest acceptable price
        price_grid_step: Grid resolution for deviations

    Returns:
        True if the agreed price is a best response for both sides

    Raises:
        NoAgreementError: If the negotiation failed
    """
    price = _require_agreement(transcript)
    last = transcript.final_round
    if last is None or not last.ask <= price <= last.bid:
        return False

    buyer_value, seller_value = to_money(buyer_value), to_money(seller_value)
    step = to_money(price_grid_step)
    upper = max(buyer_value, seller_value, price)

    buyer_now = buyer_value - price
    if buyer_now < 0:
        return False
    for deviation in _grid(Decimal("0.00"), buyer_value, step):
        # seller accepts only prices no lower than the agreed one
        payoff = buyer_value - deviation if deviation >= price else Decimal("0")
        if payoff > buyer_now:
            return False

    seller_now = price - seller_value
    if seller_now < 0:
        return False
    for deviation in _grid(seller_value, upper, step):
        # buyer accepts only prices no higher than the agreed one
        payoff = deviation - seller_value if deviation <= price else Decimal("0")
        if payoff > seller_now:
            return False

    return True
