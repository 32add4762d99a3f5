"""
Local OpenAI-compatible endpoint serving canned chat completions.

Used to exercise the LLM backend offline.
"""

import json
from typing import Any, Dict, List, Sequence, Union

from flask import Flask, jsonify, request

from src.llm.prompts import FUNCTION_NAME

OFFER_REJECTION_ARGUMENTS = (
    "{decision:false,reason:'The offered data is expected to provide a profit less than "
    "the offer price. Considering the conservative risk preference and low data sensitivity, "
    "the potential financial benefit does not justify the cost.'}"
)

ScriptItem = Union[Dict[str, Any], int]


def function_call_completion(arguments: str, name: str = FUNCTION_NAME,
                             model: str = "gpt-4-1106-preview") -> Dict[str, Any]:
    """A chat-completions body whose single choice is a function call."""
    return {
        "id": "chatcmpl-mock",
        "object": "chat.completion",
        "created": 0,
        "model": model,
        "choices": [{
            "index": 0,
            "finish_reason": "function_call",
            "message": {
                "role": "assistant",
                "content": None,
                "function_call": {"name": name, "arguments": arguments},
            },
        }],
        "usage": {"prompt_tokens": 0, "completion_tokens": 0, "total_tokens": 0},
    }


def decision_completion(decision: bool, reason: str) -> Dict[str, Any]:
    return function_call_completion(json.dumps({"decision": decision, "reason": reason}))


def content_completion(content: str) -> Dict[str, Any]:
    """A chat-completions body with plain text and no function call."""
    body = function_call_completion("")
    body["choices"][0]["finish_reason"] = "stop"
    body["choices"][0]["message"] = {"role": "assistant", "content": content}
    return body


def create_mock_app(script: Sequence[ScriptItem]) -> Flask:
    """
    Build a Flask app replaying a script of responses.

    Each POST to /v1/chat/completions consumes the next script item: a dict
    is returned as a 200 JSON body, an int as an error status. The last item
    repeats once the script is exhausted. Received request bodies are kept
    in app.config["RECEIVED"].

    Args:
        script: Response bodies or status codes, at least one

    Returns:
        Flask application
    """
    if not script:
        raise ValueError("Mock script needs at least one item")

    app = Flask(__name__)
    app.config["SCRIPT"] = list(script)
    app.config["RECEIVED"] = []
    received: List[Dict[str, Any]] = app.config["RECEIVED"]

    @app.route("/v1/chat/completions", methods=["POST"])
    def chat_completions():
        """Serve the next scripted response."""
        if not request.headers.get("Authorization", "").startswith("Bearer "):
            return jsonify({"error": {"message": "missing bearer token"}}), 401

        received.append(request.get_json(silent=True) or {})
        items = app.config["SCRIPT"]
        item = items[min(len(received), len(items)) - 1]
        if isinstance(item, int):
            return jsonify({"error": {"message": f"scripted status {item}", "code": item}}), item
        return jsonify(item)

    return app
