"""
Decision backends behind a single interface.

The rule backend applies the threshold policy, the LLM backend asks a
chat model through the offer_decision function, and the scripted backend
replays canned decisions.
"""

import logging
from abc import ABC, abstractmethod
from collections import deque
from enum import Enum
from typing import Deque, Iterable, Optional

from src.agents.profiles import (
    AgentError, AgentProfile, DecisionRequest, DecisionResponse, MarketObservation, ValueEstimate,
)
from src.agents.policy import PolicyParams, rule_decide
from src.llm.client import ChatClient, EndpointConfig, LLMError, parse_decision
from src.llm.prompts import request_for

logger = logging.getLogger(__name__)

UNAVAILABLE_REASON = "backend_unavailable"


class BackendUnavailableError(AgentError):
    """Raised when a backend cannot produce a decision."""
    pass


class BackendMode(Enum):
    RULE = "rule"
    LLM = "llm"


class OnError(Enum):
    """What decide() does when the backend fails."""
    REJECT = "reject"
    RETRY_REJECT = "retry_reject"


class DecisionBackend(ABC):
    """Produces accept/reject decisions on offers."""

    @abstractmethod
    def decide(self, profile: AgentProfile, request: DecisionRequest, value: ValueEstimate,
               obs: Optional[MarketObservation]) -> DecisionResponse:
        """
        Raises:
            BackendUnavailableError: If no decision can be produced
        """


class RuleBackend(DecisionBackend):
    def __init__(self, params: PolicyParams = PolicyParams()):
        self.params = params

    def decide(self, profile, request, value, obs):
        return rule_decide(profile, request, value, obs, self.params)


class LLMBackend(DecisionBackend):
    """Asks a chat model; any client failure surfaces as BackendUnavailableError."""

    def __init__(self, endpoint: EndpointConfig, temperature: float = 0.0):
        self.endpoint = endpoint
        self.temperature = temperature
        self._client: Optional[ChatClient] = None

    def decide(self, profile, request, value, obs):
        chat_request = request_for(request, obs, model=self.endpoint.model,
                                   temperature=self.temperature)
        try:
            if self._client is None:
                self._client = ChatClient(self.endpoint)
            return parse_decision(self._client.call(chat_request))
        except LLMError as e:
            raise BackendUnavailableError(f"{type(e).__name__}: {e}")


class ScriptedBackend(DecisionBackend):
    """Returns queued decisions in order."""

    def __init__(self, responses: Iterable[DecisionResponse]):
        self._responses: Deque[DecisionResponse] = deque(responses)

    @property
    def remaining(self) -> int:
        return len(self._responses)

    def decide(self, profile, request, value, obs):
        if not self._responses:
            raise BackendUnavailableError("Decision script exhausted")
        return self._responses.popleft()


def decide(backend: DecisionBackend, profile: AgentProfile, request: DecisionRequest,
           value: ValueEstimate, obs: Optional[MarketObservation] = None,
           on_error: OnError = OnError.REJECT) -> DecisionResponse:
    """
    Ask a backend for a decision, falling back to rejection on failure.

    Args:
        backend: Decision backend
        profile: Deciding agent
        request: Offer questions
        value: Agent's value estimate
        obs: Market observation
        on_error: REJECT rejects at once; RETRY_REJECT tries once more first

    Returns:
        The backend's decision, or a rejection with reason "backend_unavailable"
    """
    attempts = 2 if on_error is OnError.RETRY_REJECT else 1
    for attempt in range(1, attempts + 1):
        try:
            return backend.decide(profile, request, value, obs)
        except BackendUnavailableError as e:
            logger.warning("Decision for %s failed (attempt %d/%d): %s",
                           profile.id, attempt, attempts, e)
    return DecisionResponse(decision=False, reason=UNAVAILABLE_REASON)
