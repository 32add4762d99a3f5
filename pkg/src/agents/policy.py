"""
Deterministic rule policy for buying and selling data.

The buyer accepts an offer when the price does not exceed its threshold,
the effective data value scaled by a risk multiplier. Low-sensitivity
agents see values only to the nearest 5 currency units.
"""

from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_UP
from typing import Optional

from src.types import RiskPreference, Sensitivity
from src.utils import CENT, to_money, format_number
from src.agents.profiles import (
    AgentProfile, DecisionRequest, DecisionResponse, MarketObservation, ValueEstimate,
)

LOW_SENSITIVITY_GRANULARITY = Decimal("5")


@dataclass(frozen=True)
class PolicyParams:
    """Calibration of the rule policy."""
    aggressive_multiplier: Decimal = Decimal("1.3")
    conservative_multiplier: Decimal = Decimal("1.0")
    ask_markup_aggressive: Decimal = Decimal("1.5")
    ask_markup_conservative: Decimal = Decimal("1.1")
    proposal_fee: Decimal = Decimal("1.00")

    def __post_init__(self):
        for name in ("aggressive_multiplier", "conservative_multiplier",
                     "ask_markup_aggressive", "ask_markup_conservative", "proposal_fee"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} cannot be negative")


def effective_value(profile: AgentProfile, value: ValueEstimate) -> Decimal:
    """
    Value as perceived by the agent.

    High sensitivity sees the exact currency value; low sensitivity rounds
    it to the nearest multiple of 5 (halves round up).
    """
    if profile.sensitivity is Sensitivity.HIGH:
        return value.currency_value
    steps = (value.currency_value / LOW_SENSITIVITY_GRANULARITY).quantize(
        Decimal("1"), rounding=ROUND_HALF_UP)
    return to_money(steps * LOW_SENSITIVITY_GRANULARITY)


def risk_multiplier(profile: AgentProfile, params: PolicyParams = PolicyParams()) -> Decimal:
    if profile.risk is RiskPreference.AGGRESSIVE:
        return params.aggressive_multiplier
    return params.conservative_multiplier


def buyer_reservation(profile: AgentProfile, value: ValueEstimate,
                      params: PolicyParams = PolicyParams()) -> Decimal:
    """Highest price the buyer accepts: multiplier times effective value."""
    return (risk_multiplier(profile, params) * effective_value(profile, value)).quantize(
        CENT, rounding=ROUND_HALF_UP)


def seller_reservation(params: PolicyParams = PolicyParams()) -> Decimal:
    """Lowest price a seller accepts: one cent above the proposal fee."""
    return to_money(params.proposal_fee + CENT)


def rule_decide(profile: AgentProfile, request: DecisionRequest, value: ValueEstimate,
                obs: Optional[MarketObservation] = None,
                params: PolicyParams = PolicyParams()) -> DecisionResponse:
    """
    Decide on an offer with the threshold rule.

    Args:
        profile: Deciding agent
        request: Offer being decided
        value: Agent's value estimate for the data
        obs: Market observation; accepted but not used by the rule
        params: Policy calibration

    Returns:
        DecisionResponse with a templated reason
    """
    threshold = buyer_reservation(profile, value, params)
    price = request.offer_price
    perceived = format_number(effective_value(profile, value))

    if price <= threshold:
        reason = (
            f"The offered data is expected to be worth {perceived} and my "
            f"{profile.risk.value} limit is {format_number(threshold)}, "
            f"so a price of {format_number(price)} is acceptable."
        )
        return DecisionResponse(decision=True, reason=reason)

    reason = (
        f"The offered data is expected to yield a profit less than the offer price: "
        f"worth {perceived} with a {profile.risk.value} limit of {format_number(threshold)}, "
        f"but offered at {format_number(price)}."
    )
    return DecisionResponse(decision=False, reason=reason)


def seller_initial_ask(profile: AgentProfile, value: ValueEstimate,
                       obs: Optional[MarketObservation] = None,
                       params: PolicyParams = PolicyParams()) -> Decimal:
    """
    Opening ask of a seller.

    Aggressive sellers mark the effective value up by 1.5, conservative
    ones by 1.1, never below fee + 0.01.
    """
    markup = (params.ask_markup_aggressive if profile.risk is RiskPreference.AGGRESSIVE
              else params.ask_markup_conservative)
    ask = (markup * effective_value(profile, value)).quantize(CENT, rounding=ROUND_HALF_UP)
    return max(ask, seller_reservation(params))
