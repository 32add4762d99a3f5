"""
Replay of a canned decision script.

A fixture pins config overrides and, per proposal, the tick, seller, ask,
controller decision and settled price. The traffic side is simulated as
usual, so the waiting-time metrics come from the scripted trades.
"""

import json
import logging
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Any, Dict, List

from src.agents.backend import ScriptedBackend, decide
from src.agents.policy import buyer_reservation, seller_reservation
from src.agents.profiles import DecisionRequest, DecisionResponse
from src.negotiation.protocol import immediate_agreement
from src.utils import to_money
from src.harness.config import ConfigError, ScenarioConfig, apply_overrides
from src.harness.reporters import RunOutput
from src.harness.runner import ProposalOutcome, RunContext, outcome_payoffs

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScriptStep:
    """One scripted proposal and the controller's canned answer."""
    t_s: int
    seller: str
    ask: Decimal
    price: Decimal
    decision: bool
    reason: str

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScriptStep":
        return cls(
            t_s=int(data["t_s"]),
            seller=str(data["seller"]),
            ask=to_money(str(data["ask"])),
            price=to_money(str(data.get("price", data["ask"]))),
            decision=bool(data["decision"]),
            reason=str(data["reason"]),
        )


@dataclass
class ReplayFixture:
    overrides: Dict[str, Any]
    script: List[ScriptStep]

    def config(self) -> ScenarioConfig:
        return apply_overrides(ScenarioConfig(), self.overrides)


def load_fixture(path: str) -> ReplayFixture:
    """
    Read a replay fixture.

    Raises:
        ConfigError: If the file is missing or malformed
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        script = [ScriptStep.from_dict(step) for step in data["script"]]
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"Cannot load replay fixture '{path}': {e}")
    script.sort(key=lambda step: step.t_s)
    return ReplayFixture(overrides=dict(data.get("config", {})), script=script)


def run_replay(fixture: ReplayFixture) -> RunOutput:
    """
    Run a fixture's script against a live simulation.

    Products are built from the configured accident at each scripted tick;
    the first accepted step retimes the signals from that tick.

    Returns:
        RunOutput whose trades are exactly the scripted rows

    Raises:
        ConfigError: If the script does not fit inside the horizon
    """
    config = fixture.config()
    horizon = config.run.horizon_s
    if any(not 0 <= step.t_s < horizon for step in fixture.script):
        raise ConfigError(f"Replay script steps must lie in [0, {horizon})")

    context = RunContext.prepare(config)
    backend = ScriptedBackend(DecisionResponse(s.decision, s.reason) for s in fixture.script)
    controller = context.controller
    params = config.policy_params()
    ledger = context.ledger
    steps = list(fixture.script)

    for t in range(horizon):
        while steps and steps[0].t_s == t:
            step = steps.pop(0)
            product = config.accident_product(t)
            value = context.value(product, t)
            proposal_id = ledger.submit_proposal(step.seller, product, step.ask, t)

            request = DecisionRequest.build(controller, value, step.ask)
            response = decide(backend, controller, request, value,
                              ledger.observation(config.market.history_k))
            transcript = None
            if response.decision:
                ledger.settle(proposal_id, controller.id, step.price, t)
                transcript = immediate_agreement(
                    controller.id, step.seller, step.price, seller_reservation(params),
                    buyer_reservation(controller, value, params))
                context.adjust_signals(product, t)
            else:
                ledger.reject(proposal_id, controller.id, t)
            logger.info("t=%d replayed %s: %s", t, step.seller, response.reason)
            price = step.price if response.decision else step.ask
            payoffs = outcome_payoffs(transcript, value, price, response.decision,
                                      ledger.proposal_fee)
            context.outcomes.append(ProposalOutcome(
                proposal_id, t, step.seller, step.ask, price, response.decision, transcript,
                payoffs))
        context.simulation.advance()

    return context.finish()
