"""
Tests for chat request construction.
"""

import json
from decimal import Decimal
from src.types import Role, RiskPreference, Sensitivity
from src.agents.profiles import AgentProfile, MarketObservation, ValueEstimate
from src.llm.prompts import (
    DEFAULT_MODEL, FUNCTION_NAME, OFFER_DECISION_FUNCTION, SYSTEM_PREAMBLE, build_prompt,
    canonical_function_schema,
)

CONTROLLER = AgentProfile("controller", Role.CONTROLLER, RiskPreference.CONSERVATIVE,
                          Sensitivity.LOW, Decimal("100"))


def user_payload(request):
    return json.loads(request.messages[1]["content"])


def test_reference_questions():
    """Test the rendered questions for 10 s of value offered at 12."""
    request = build_prompt(CONTROLLER, ValueEstimate.from_seconds(10), Decimal("12"))
    payload = user_payload(request)
    assert payload == {
        "background": ("I am a traffic light controller in an intelligent transportation "
                       "system, looking to purchase data for controlling support."),
        "risk_preference": "My risk preference is conservative.",
        "data_sensitivity": "My data sensitivity is low.",
        "expected_data_value": "I expect the data to decrease average delay by 10 seconds",
        "offer_price": "The data is offered at 12 dollars.",
    }


def test_zero_value_rendering():
    """Test that zero value is rendered plainly."""
    request = build_prompt(CONTROLLER, ValueEstimate.from_seconds(0), Decimal("1.01"))
    payload = user_payload(request)
    assert payload["expected_data_value"].endswith("by 0 seconds")
    assert payload["offer_price"] == "The data is offered at 1.01 dollars."


def test_vehicle_background():
    """Test that sellers get their own background."""
    vehicle = AgentProfile("vehicle-1", Role.VEHICLE, RiskPreference.AGGRESSIVE,
                           Sensitivity.HIGH, Decimal("30"))
    payload = user_payload(build_prompt(vehicle, ValueEstimate.from_seconds(3.25), Decimal("5")))
    assert "connected vehicle" in payload["background"]
    assert payload["expected_data_value"].endswith("by 3.25 seconds")


def test_request_body_forces_function():
    """Test the wire body."""
    body = build_prompt(CONTROLLER, ValueEstimate.from_seconds(10), Decimal("12")).to_body()
    assert body["model"] == DEFAULT_MODEL
    assert body["temperature"] == 0.0
    assert body["function_call"] == {"name": FUNCTION_NAME}
    assert body["functions"] == [OFFER_DECISION_FUNCTION]
    assert body["messages"][0] == {"role": "system", "content": SYSTEM_PREAMBLE}
    assert len(body["messages"]) == 2


def test_canonical_function_schema():
    """Test the byte-stable schema serialization."""
    expected = (
        '{"description":"Decide whether to accept the offer","name":"offer_decision",'
        '"parameters":{"properties":{"decision":{"description":"True to accept the offer, '
        'false to reject it","type":"boolean"},"reason":{"description":"Reason for the '
        'decision","type":"string"}},"required":["decision","reason"],"type":"object"}}'
    )
    assert canonical_function_schema() == expected


def test_market_context_message():
    """Test the optional observation message."""
    obs = MarketObservation(open_proposals=2, recent_trade_prices=(Decimal("11.00"),),
                            recent_rejection_prices=())
    request = build_prompt(CONTROLLER, ValueEstimate.from_seconds(10), Decimal("12"), obs=obs)
    assert len(request.messages) == 3
    assert request.messages[2]["content"] == (
        "Market context: Open proposals: 2. Recent trade prices: 11. "
        "Recently rejected asks: none.")


def test_deterministic_json():
    """Test that equal inputs give identical bytes."""
    first = build_prompt(CONTROLLER, ValueEstimate.from_seconds(10), Decimal("12"))
    second = build_prompt(CONTROLLER, ValueEstimate.from_seconds(10), Decimal("12"))
    assert first.to_json() == second.to_json()
