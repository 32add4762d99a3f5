"""
Client for OpenAI-compatible chat-completions endpoints.

Uses the openai SDK for transport with its own retries disabled; retries
on connection failures and 5xx responses follow EndpointConfig.
"""

import json
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import openai

from src.agents.profiles import DecisionResponse
from src.llm.arguments import ArgumentSyntaxError, parse_arguments
from src.llm.prompts import ChatRequest, DEFAULT_MODEL, FUNCTION_NAME

logger = logging.getLogger(__name__)

DEFAULT_BASE_URL = "https://api.openai.com"
API_KEY_ENV = "DTM_LLM_API_KEY"
BASE_URL_ENV = "DTM_LLM_BASE_URL"


class LLMError(Exception):
    """Base error for language-model calls."""
    pass


class LLMTimeoutError(LLMError):
    """Raised when the endpoint does not answer within the timeout."""
    pass


class TransportError(LLMError):
    """Raised on connection failures and server errors after all retries."""
    pass


class AuthError(LLMError):
    """Raised when the API key is missing or refused (401/403)."""
    pass


class RateLimitedError(LLMError):
    """Raised on HTTP 429."""
    pass


class RequestRejectedError(LLMError):
    """Raised on any other 4xx response."""
    pass


class MalformedResponseError(LLMError):
    """Raised when a response does not carry a usable offer_decision call."""
    pass


@dataclass(frozen=True)
class EndpointConfig:
    """
    Where and how to reach the model.

    The API key never appears in repr output.
    """
    base_url: str = DEFAULT_BASE_URL
    api_key: Optional[str] = field(default=None, repr=False)
    model: str = DEFAULT_MODEL
    timeout_s: float = 30.0
    retries: int = 2
    backoff_s: float = 1.0
    use_env_proxy: bool = True

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")
        if self.retries < 0:
            raise ValueError("retries cannot be negative")
        if self.backoff_s < 0:
            raise ValueError("backoff_s cannot be negative")

    @classmethod
    def from_env(cls, **overrides: Any) -> "EndpointConfig":
        """Read the API key and default base URL from the environment."""
        values: Dict[str, Any] = {
            "base_url": os.environ.get(BASE_URL_ENV, DEFAULT_BASE_URL),
            "api_key": os.environ.get(API_KEY_ENV) or None,
        }
        values.update(overrides)
        return cls(**values)

    @property
    def api_root(self) -> str:
        return self.base_url.rstrip("/") + "/v1"


@dataclass(frozen=True)
class FunctionCall:
    name: str
    arguments: str


@dataclass(frozen=True)
class ChatResponse:
    """Raw response body plus the extracted function call, if any."""
    raw_body: str
    function_call: Optional[FunctionCall] = None
    content: Optional[str] = None

    @classmethod
    def from_body(cls, raw_body: str) -> "ChatResponse":
        """
        Extract the first choice's function call from a response body.

        Raises:
            MalformedResponseError: If the body is not a chat-completions object
        """
        try:
            body = json.loads(raw_body)
            message = body["choices"][0]["message"]
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise MalformedResponseError(f"Unexpected response body: {e}")

        call = message.get("function_call")
        function_call = None
        if isinstance(call, dict) and "name" in call:
            arguments = call.get("arguments", "")
            if not isinstance(arguments, str):
                arguments = json.dumps(arguments)
            function_call = FunctionCall(name=call["name"], arguments=arguments)
        return cls(raw_body=raw_body, function_call=function_call, content=message.get("content"))


class ChatClient:
    """Reusable client bound to one endpoint."""

    def __init__(self, endpoint: EndpointConfig):
        """
        Args:
            endpoint: Endpoint settings

        Raises:
            AuthError: If no API key is configured
        """
        if not endpoint.api_key:
            raise AuthError(f"No API key configured; set {API_KEY_ENV}")
        self.endpoint = endpoint
        http_client = None if endpoint.use_env_proxy else openai.DefaultHttpxClient(trust_env=False)
        self._client = openai.OpenAI(
            api_key=endpoint.api_key,
            base_url=endpoint.api_root,
            timeout=endpoint.timeout_s,
            max_retries=0,
            http_client=http_client,
        )

    def call(self, request: ChatRequest) -> ChatResponse:
        """
        POST a chat request, retrying transport failures and 5xx responses.

        Args:
            request: Chat request

        Returns:
            ChatResponse

        Raises:
            LLMTimeoutError: If every attempt timed out
            TransportError: If every attempt failed to connect or hit a 5xx
            AuthError: On 401 or 403
            RateLimitedError: On 429
            RequestRejectedError: On other 4xx responses
        """
        attempts = self.endpoint.retries + 1
        last_error: LLMError = TransportError("No attempt made")
        for attempt in range(1, attempts + 1):
            try:
                raw = self._client.chat.completions.with_raw_response.create(**request.to_body())
                return ChatResponse.from_body(raw.http_response.text)
            except openai.APITimeoutError as e:
                last_error = LLMTimeoutError(f"Timed out after {self.endpoint.timeout_s} s: {e}")
            except openai.APIConnectionError as e:
                last_error = TransportError(f"Connection failed: {e}")
            except (openai.AuthenticationError, openai.PermissionDeniedError) as e:
                raise AuthError(f"Endpoint refused credentials ({e.status_code})")
            except openai.RateLimitError as e:
                raise RateLimitedError(f"Rate limited ({e.status_code})")
            except openai.APIStatusError as e:
                if e.status_code < 500:
                    raise RequestRejectedError(f"Request rejected ({e.status_code}): {e.message}")
                last_error = TransportError(f"Server error ({e.status_code})")

            if attempt < attempts:
                logger.warning("LLM call attempt %d/%d failed: %s; retrying in %.1f s",
                               attempt, attempts, last_error, self.endpoint.backoff_s)
                time.sleep(self.endpoint.backoff_s)

        logger.error("LLM call failed after %d attempts: %s", attempts, last_error)
        raise last_error


def call(endpoint: EndpointConfig, request: ChatRequest) -> ChatResponse:
    """One-shot call through a fresh ChatClient."""
    return ChatClient(endpoint).call(request)


def parse_decision(response: ChatResponse) -> DecisionResponse:
    """
    Extract the decision from an offer_decision function call.

    Raises:
        MalformedResponseError: If there is no offer_decision call or its
            arguments lack a boolean decision and a non-empty reason
    """
    call_ = response.function_call
    if call_ is None:
        raise MalformedResponseError("Response has no function_call")
    if call_.name != FUNCTION_NAME:
        raise MalformedResponseError(f"Unexpected function '{call_.name}'")
    try:
        arguments = parse_arguments(call_.arguments)
    except ArgumentSyntaxError as e:
        raise MalformedResponseError(f"Unparseable arguments: {e}")

    if not isinstance(arguments, dict):
        raise MalformedResponseError("Arguments are not an object")
    decision = arguments.get("decision")
    reason = arguments.get("reason")
    if not isinstance(decision, bool):
        raise MalformedResponseError("Missing boolean 'decision'")
    if not isinstance(reason, str) or not reason.strip():
        raise MalformedResponseError("Missing 'reason'")
    return DecisionResponse(decision=decision, reason=reason)
