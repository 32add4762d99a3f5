"""
Shared fixtures: a mock chat-completions server on an ephemeral port.
"""

import threading

import pytest
from werkzeug.serving import make_server

from src.llm.client import EndpointConfig
from src.llm.mock_server import create_mock_app


class MockEndpoint:
    """A running mock server and the endpoint settings that reach it."""

    def __init__(self, app, base_url):
        self.app = app
        self.base_url = base_url

    @property
    def received(self):
        return self.app.config["RECEIVED"]

    def endpoint(self, **overrides):
        values = dict(base_url=self.base_url, api_key="test-key", timeout_s=5.0,
                      retries=0, backoff_s=0.0, use_env_proxy=False)
        values.update(overrides)
        return EndpointConfig(**values)


@pytest.fixture
def mock_llm():
    """Factory starting a mock server for a response script; servers stop after the test."""
    servers = []

    def start(script):
        app = create_mock_app(script)
        server = make_server("127.0.0.1", 0, app, threaded=True)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        servers.append(server)
        return MockEndpoint(app, f"http://127.0.0.1:{server.server_port}")

    yield start
    for server in servers:
        server.shutdown()
