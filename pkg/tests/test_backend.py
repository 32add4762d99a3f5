"""
Tests for decision backends and the decide() fallback.
"""

import pytest
from decimal import Decimal
from src.types import Role, RiskPreference, Sensitivity
from src.agents.backend import (
    BackendUnavailableError, LLMBackend, OnError, RuleBackend, ScriptedBackend, decide,
)
from src.agents.policy import rule_decide
from src.agents.profiles import (
    AgentProfile, DecisionRequest, DecisionResponse, MarketObservation, ValueEstimate,
)
from src.llm.client import EndpointConfig
from src.llm.mock_server import OFFER_REJECTION_ARGUMENTS, function_call_completion

CONTROLLER = AgentProfile("controller", Role.CONTROLLER, RiskPreference.CONSERVATIVE,
                          Sensitivity.LOW, Decimal("100"))
VALUE = ValueEstimate.from_seconds(10)
REQUEST = DecisionRequest.build(CONTROLLER, VALUE, Decimal("12"))


class FlakyBackend(RuleBackend):
    """Fails a set number of times before answering with the rule."""

    def __init__(self, failures):
        super().__init__()
        self.failures = failures
        self.calls = 0

    def decide(self, profile, request, value, obs):
        self.calls += 1
        if self.calls <= self.failures:
            raise BackendUnavailableError("down")
        return super().decide(profile, request, value, obs)


def test_rule_backend_matches_rule_decide():
    """Test that the rule backend is a plain dispatch."""
    obs = MarketObservation()
    assert decide(RuleBackend(), CONTROLLER, REQUEST, VALUE, obs) == rule_decide(
        CONTROLLER, REQUEST, VALUE, obs)


def test_llm_backend_reference_rejection(mock_llm):
    """Test the LLM backend against the canned rejection."""
    server = mock_llm([function_call_completion(OFFER_REJECTION_ARGUMENTS)])
    backend = LLMBackend(server.endpoint())
    response = decide(backend, CONTROLLER, REQUEST, VALUE, MarketObservation())
    assert response.decision is False
    assert "profit less than the offer price" in response.reason
    assert server.received[0]["messages"][2]["content"].startswith("Market context:")


def test_llm_backend_down_rejects():
    """Test the default fallback when nothing answers."""
    endpoint = EndpointConfig(base_url="http://127.0.0.1:1", api_key="k", timeout_s=2.0,
                              retries=0, backoff_s=0.0, use_env_proxy=False)
    response = decide(LLMBackend(endpoint), CONTROLLER, REQUEST, VALUE)
    assert response == DecisionResponse(False, "backend_unavailable")


def test_llm_backend_without_key_rejects():
    """Test that a missing key also falls back to rejection."""
    response = decide(LLMBackend(EndpointConfig(api_key=None)), CONTROLLER, REQUEST, VALUE)
    assert response.reason == "backend_unavailable"


def test_llm_backend_malformed_rejects(mock_llm):
    """Test that an unusable answer falls back to rejection."""
    server = mock_llm([function_call_completion("{decision: maybe}")])
    response = decide(LLMBackend(server.endpoint()), CONTROLLER, REQUEST, VALUE)
    assert response.reason == "backend_unavailable"


def test_retry_then_reject():
    """Test the retry_reject error policy."""
    once = FlakyBackend(failures=1)
    assert decide(once, CONTROLLER, REQUEST, VALUE, on_error=OnError.RETRY_REJECT).reason != (
        "backend_unavailable")
    assert once.calls == 2

    always = FlakyBackend(failures=5)
    response = decide(always, CONTROLLER, REQUEST, VALUE, on_error=OnError.RETRY_REJECT)
    assert response.reason == "backend_unavailable"
    assert always.calls == 2

    plain = FlakyBackend(failures=1)
    assert decide(plain, CONTROLLER, REQUEST, VALUE).reason == "backend_unavailable"
    assert plain.calls == 1


def test_scripted_backend():
    """Test canned decisions in order and exhaustion."""
    backend = ScriptedBackend([DecisionResponse(True, "a"), DecisionResponse(False, "b")])
    assert backend.decide(CONTROLLER, REQUEST, VALUE, None).reason == "a"
    assert backend.remaining == 1
    assert backend.decide(CONTROLLER, REQUEST, VALUE, None).reason == "b"
    with pytest.raises(BackendUnavailableError, match="exhausted"):
        backend.decide(CONTROLLER, REQUEST, VALUE, None)


def test_decision_response_requires_reason():
    """Test the non-empty reason invariant."""
    with pytest.raises(ValueError):
        DecisionResponse(True, "  ")
