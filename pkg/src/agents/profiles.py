"""
Agent profiles and the value types exchanged with decision backends.
"""

from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from typing import Any, Dict, Tuple

from src.types import Role, RiskPreference, Sensitivity
from src.utils import to_money, format_number

DEFAULT_HISTORY_K = 5

CONTROLLER_BACKGROUND = (
    "I am a traffic light controller in an intelligent transportation system, "
    "looking to purchase data for controlling support."
)
VEHICLE_BACKGROUND = (
    "I am a connected vehicle in an intelligent transportation system, "
    "looking to sell observed accident data."
)


class AgentError(Exception):
    """Base error for agent profiles, valuation and decisions."""
    pass


class ValueMethod(Enum):
    """Where a value estimate came from."""
    ORACLE = "oracle"
    LLM = "llm"


@dataclass(frozen=True)
class AgentProfile:
    """Identity, role, preferences and starting funds of a market agent."""
    id: str
    role: Role
    risk: RiskPreference
    sensitivity: Sensitivity
    endowment: Decimal

    def __post_init__(self):
        """Validate profile fields."""
        if not self.id:
            raise ValueError("Agent id cannot be empty")
        if self.endowment < 0:
            raise ValueError(f"Agent '{self.id}': endowment cannot be negative")


@dataclass(frozen=True)
class ValueEstimate:
    """
    Expected benefit of a data product.

    Attributes:
        seconds_saved: Expected reduction in average waiting time
        currency_value: seconds_saved converted to currency
        method: Source of the estimate
        basis_s: Simulation time the estimate refers to
    """
    seconds_saved: float
    currency_value: Decimal
    method: ValueMethod
    basis_s: int

    def __post_init__(self):
        if self.seconds_saved < 0:
            raise ValueError("seconds_saved cannot be negative")

    @classmethod
    def from_seconds(cls, seconds_saved: float, conversion_rate: float = 1.0,
                     method: ValueMethod = ValueMethod.ORACLE, basis_s: int = 0) -> "ValueEstimate":
        """Build an estimate whose currency value is seconds_saved times the conversion rate."""
        seconds_saved = max(0.0, seconds_saved)
        return cls(
            seconds_saved=seconds_saved,
            currency_value=to_money(seconds_saved * conversion_rate),
            method=method,
            basis_s=basis_s,
        )


@dataclass(frozen=True)
class MarketObservation:
    """What an agent can see of other agents' behaviour."""
    open_proposals: int = 0
    recent_trade_prices: Tuple[Decimal, ...] = ()
    recent_rejection_prices: Tuple[Decimal, ...] = ()
    k: int = DEFAULT_HISTORY_K

    def summary(self) -> str:
        """One-line plain-language rendering used in prompts."""
        trades = ", ".join(format_number(p) for p in self.recent_trade_prices) or "none"
        rejections = ", ".join(format_number(p) for p in self.recent_rejection_prices) or "none"
        return (
            f"Open proposals: {self.open_proposals}. "
            f"Recent trade prices: {trades}. "
            f"Recently rejected asks: {rejections}."
        )


@dataclass(frozen=True)
class DecisionRequest:
    """
    The five questions put to an agent about an offer.

    Field names and sentence templates are part of the wire format.
    """
    background: str
    risk_preference: str
    data_sensitivity: str
    expected_data_value: str
    offer_price: Decimal

    @classmethod
    def build(cls, profile: AgentProfile, value: ValueEstimate,
              offer_price: Decimal) -> "DecisionRequest":
        """
        Render the questions for a profile, value and offer.

        Args:
            profile: Deciding agent; vehicles get the seller background
            value: Value estimate, rendered in seconds
            offer_price: Price on the table

        Returns:
            DecisionRequest with deterministic texts
        """
        background = CONTROLLER_BACKGROUND if profile.role is Role.CONTROLLER else VEHICLE_BACKGROUND
        return cls(
            background=background,
            risk_preference=f"My risk preference is {profile.risk.value}.",
            data_sensitivity=f"My data sensitivity is {profile.sensitivity.value}.",
            expected_data_value=(
                "I expect the data to decrease average delay by "
                f"{format_number(value.seconds_saved)} seconds"
            ),
            offer_price=to_money(offer_price),
        )

    @property
    def offer_text(self) -> str:
        return f"The data is offered at {format_number(self.offer_price)} dollars."

    def to_dict(self) -> Dict[str, Any]:
        """Convert to the JSON object sent to a language model."""
        return {
            "background": self.background,
            "risk_preference": self.risk_preference,
            "data_sensitivity": self.data_sensitivity,
            "expected_data_value": self.expected_data_value,
            "offer_price": self.offer_text,
        }


@dataclass(frozen=True)
class DecisionResponse:
    """Accept/reject decision with its stated reason."""
    decision: bool
    reason: str

    def __post_init__(self):
        if not self.reason or not self.reason.strip():
            raise ValueError("Decision reason cannot be empty")

    def to_dict(self) -> Dict[str, Any]:
        return {"decision": self.decision, "reason": self.reason}
