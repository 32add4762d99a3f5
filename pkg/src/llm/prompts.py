"""
Chat request construction for offer decisions.

The system message carries the fixed traffic and market background; the
user message carries the decision questions as a JSON object.
"""

import json
from dataclasses import dataclass
from decimal import Decimal
from typing import Any, Dict, List, Optional, Tuple

from src.agents.profiles import (
    AgentProfile, DecisionRequest, MarketObservation, ValueEstimate,
)

DEFAULT_MODEL = "gpt-4-1106-preview"
FUNCTION_NAME = "offer_decision"
PREAMBLE_VERSION = "1"

SYSTEM_PREAMBLE = (
    "You act on behalf of one participant in a traffic data market. "
    "Connected vehicles observe accidents and offer the observations for sale; "
    "a traffic light controller may buy them to retime its signals. "
    "Green time moved toward an approach blocked by an accident clears its queue sooner "
    "and lowers the average waiting time of vehicles in the network. "
    "Every proposal costs the seller a fee whether or not it sells, and the buyer pays "
    "the agreed price out of a limited budget. "
    "Weigh the expected benefit of the data against its price according to your risk "
    "preference and data sensitivity, then call offer_decision with your decision "
    "and a short reason."
)

OFFER_DECISION_FUNCTION: Dict[str, Any] = {
    "name": FUNCTION_NAME,
    "description": "Decide whether to accept the offer",
    "parameters": {
        "type": "object",
        "properties": {
            "decision": {
                "type": "boolean",
                "description": "True to accept the offer, false to reject it",
            },
            "reason": {
                "type": "string",
                "description": "Reason for the decision",
            },
        },
        "required": ["decision", "reason"],
    },
}


def canonical_json(value: Any) -> str:
    """Deterministic compact JSON with sorted keys."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_function_schema() -> str:
    return canonical_json(OFFER_DECISION_FUNCTION)


@dataclass(frozen=True)
class ChatRequest:
    """A chat-completions request forcing the offer_decision function."""
    messages: Tuple[Dict[str, str], ...]
    model: str = DEFAULT_MODEL
    temperature: float = 0.0
    functions: Tuple[Dict[str, Any], ...] = (OFFER_DECISION_FUNCTION,)

    def to_body(self) -> Dict[str, Any]:
        """Request body in the chat-completions wire format."""
        return {
            "model": self.model,
            "messages": [dict(m) for m in self.messages],
            "functions": list(self.functions),
            "function_call": {"name": FUNCTION_NAME},
            "temperature": self.temperature,
        }

    def to_json(self) -> bytes:
        return canonical_json(self.to_body()).encode("utf-8")


def request_for(decision: DecisionRequest, obs: Optional[MarketObservation] = None,
                model: str = DEFAULT_MODEL, temperature: float = 0.0) -> ChatRequest:
    """Wrap already-rendered decision questions in a chat request."""
    messages: List[Dict[str, str]] = [
        {"role": "system", "content": SYSTEM_PREAMBLE},
        {"role": "user", "content": json.dumps(decision.to_dict(), ensure_ascii=False)},
    ]
    if obs is not None:
        messages.append({"role": "user", "content": f"Market context: {obs.summary()}"})
    return ChatRequest(messages=tuple(messages), model=model, temperature=temperature)


def build_prompt(profile: AgentProfile, value: ValueEstimate, offer_price: Decimal,
                 obs: Optional[MarketObservation] = None, model: str = DEFAULT_MODEL,
                 temperature: float = 0.0) -> ChatRequest:
    """
    Build the chat request asking an agent to decide on an offer.

    Args:
        profile: Deciding agent; controllers get the buyer background
        value: Expected benefit, rendered in seconds
        offer_price: Price on the table
        obs: Optional market context appended as a second user message
        model: Model name
        temperature: Sampling temperature

    Returns:
        ChatRequest with deterministic content
    """
    decision = DecisionRequest.build(profile, value, offer_price)
    return request_for(decision, obs, model, temperature)
