"""
End-to-end run of the traffic data market.

Each run simulates the baseline plan once, then drives a second simulation
tick by tick. On every observation tick vehicles near the accident become
sellers, post proposals, and the controller decides, negotiates and pays.
The first purchase about an accident retimes the downstream signal from
that tick on.
"""

import logging
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Dict, List, Optional, Set

from src.types import DataProduct, Role
from src.traffic.observation import observe_accident
from src.traffic.signals import SignalPlan, apply_data_driven_adjustment
from src.traffic.simulator import Scenario, SimResult, Simulation, event_digest, run
from src.market.ledger import TradeLedger
from src.agents.backend import (
    BackendMode, DecisionBackend, LLMBackend, RuleBackend, decide,
)
from src.agents.policy import buyer_reservation, seller_initial_ask, seller_reservation
from src.agents.profiles import AgentProfile, DecisionRequest, ValueEstimate
from src.agents.registry import AgentRegistry
from src.agents.valuation import OracleCache
from src.negotiation.protocol import (
    NegotiationTranscript, immediate_agreement, run_negotiation,
)
from src.negotiation.pricing import UtilityReport, final_price, utilities
from src.metrics.waiting import MetricReport, delta_phi, EmptyPopulationError, waiting_series
from src.metrics.tables import RunSummary, TradeSample
from src.harness.config import ScenarioConfig, render_config
from src.harness.reporters import NegotiationRow, RunOutput, TradeRow, UtilityRow, WaitingRow

logger = logging.getLogger(__name__)


def make_backend(config: ScenarioConfig) -> DecisionBackend:
    """Decision backend selected by backend.mode."""
    if config.backend.mode is BackendMode.LLM:
        return LLMBackend(config.endpoint(), temperature=config.backend.temperature)
    return RuleBackend(config.policy_params())


def outcome_payoffs(transcript: Optional[NegotiationTranscript], value: ValueEstimate,
                    price: Decimal, accepted: bool, fee: Decimal) -> UtilityReport:
    """Payoffs of a closed proposal; a proposal that did not settle costs the seller its fee."""
    if accepted and transcript is not None:
        return utilities(transcript, value, price, fee)
    return UtilityReport(Decimal("0.00"), -fee)


@dataclass
class ProposalOutcome:
    """How one proposal closed."""
    proposal_id: int
    t_s: int
    seller_id: str
    ask: Decimal
    price: Decimal
    accepted: bool
    transcript: Optional[NegotiationTranscript] = None
    payoffs: Optional[UtilityReport] = None


@dataclass
class RunContext:
    """
    Shared state of one run: the baseline, the oracle, the ledger and the
    live simulation whose plan the controller may change.
    """
    config: ScenarioConfig
    scenario: Scenario
    base_plan: SignalPlan
    baseline: SimResult
    oracle: OracleCache
    registry: AgentRegistry
    ledger: TradeLedger
    simulation: Simulation
    adjusted_links: Set[int] = field(default_factory=set)
    outcomes: List[ProposalOutcome] = field(default_factory=list)

    @classmethod
    def prepare(cls, config: ScenarioConfig) -> "RunContext":
        """Build the world, run the baseline and open accounts for every agent."""
        network = config.build_network()
        scenario = config.build_scenario(network)
        base_plan = config.build_plan(network)
        horizon = config.run.horizon_s
        seed = config.demand_seed

        baseline = run(scenario, base_plan, horizon, seed)
        oracle = OracleCache(scenario, base_plan, horizon, seed,
                             config.pricing.conversion_rate, baseline=baseline)
        registry = config.build_registry()
        ledger = TradeLedger(proposal_fee=config.market.proposal_fee)
        for profile in registry.all():
            ledger.register_agent(profile.id, profile.endowment, now_s=0)

        return cls(
            config=config,
            scenario=scenario,
            base_plan=base_plan,
            baseline=baseline,
            oracle=oracle,
            registry=registry,
            ledger=ledger,
            simulation=Simulation(scenario, base_plan, horizon, seed),
        )

    @property
    def controller(self) -> AgentProfile:
        return self.registry.controller()

    def value(self, product: DataProduct, t_s: int) -> ValueEstimate:
        return self.oracle.value(product, t_s, self.config.signal.adjustment_delta_s)

    def adjust_signals(self, product: DataProduct, t_s: int) -> None:
        """Apply the data-driven adjustment once per accident link, effective from t_s."""
        if product.link_id in self.adjusted_links:
            return
        self.adjusted_links.add(product.link_id)
        plan = apply_data_driven_adjustment(self.simulation.plan, product,
                                            self.config.signal.adjustment_delta_s)
        self.simulation.set_plan(plan)
        logger.info("t=%d signals adjusted for the accident on link %d", t_s, product.link_id)

    def finish(self) -> RunOutput:
        """
        Expire open proposals, check the ledger and assemble the output.

        Raises:
            ConservationError: If the ledger no longer balances
        """
        config = self.config
        self.ledger.expire_open(config.run.horizon_s)
        self.ledger.check_conservation()
        treated = self.simulation.result()

        controller = self.controller
        spend = self.ledger.total_spend(controller.id)
        try:
            report = delta_phi(self.baseline, treated).with_market(spend, len(self.ledger.trades))
        except EmptyPopulationError:
            report = MetricReport(0.0, 0.0, 0.0, 0.0, spend, len(self.ledger.trades))
        logger.info("Run finished: %d proposals, %d trades, improvement %.3f%%",
                    len(self.outcomes), report.trades, report.improvement_pct)

        summary = RunSummary(
            risk=controller.risk,
            sensitivity=controller.sensitivity,
            flow_vph=config.demand.flow_vph,
            proposals=len(self.outcomes),
            accepted=sum(1 for o in self.outcomes if o.accepted),
            improvement_pct=report.improvement_pct,
            trades=[TradeSample(o.price, report.improvement_pct)
                    for o in self.outcomes if o.accepted],
        )
        negotiations = [
            NegotiationRow(o.proposal_id, r.round, r.ask, r.bid, o.transcript.outcome.value)
            for o in self.outcomes if o.transcript is not None
            for r in o.transcript.rounds
        ]
        return RunOutput(
            report=report,
            trades=[TradeRow(o.t_s, o.seller_id, controller.id, o.price, o.accepted)
                    for o in self.outcomes],
            negotiations=negotiations,
            events=treated.events,
            event_digest=event_digest(treated.events),
            config_echo=render_config(config),
            seed=config.demand_seed,
            summary=summary,
            journal=list(self.ledger.journal),
            waiting=[WaitingRow(t, before, after)
                     for t, before, after in waiting_series(self.baseline, treated)],
            utilities=[UtilityRow(o.proposal_id, o.seller_id, o.payoffs.buyer_utility,
                                  o.payoffs.seller_utility)
                       for o in self.outcomes if o.payoffs is not None],
        )


@dataclass
class SellerState:
    """A vehicle bound to a seller profile and the product it holds."""
    profile: AgentProfile
    vehicle_id: int
    product: DataProduct
    proposals: int = 0
    sold: bool = False


class MarketSession:
    """Trading logic run at each observation tick."""

    def __init__(self, context: RunContext, backend: DecisionBackend):
        self.context = context
        self.backend = backend
        self.config = context.config
        self.params = context.config.policy_params()
        self.controller = context.controller
        self.vehicle_profiles = context.registry.by_role(Role.VEHICLE)
        self.sellers: Dict[int, SellerState] = {}

    def trading_point(self, t_s: int) -> None:
        """Observe, propose and trade at tick t_s, before the tick is simulated."""
        self._bind_observers(t_s)
        for seller in list(self.sellers.values()):
            if self._may_propose(seller):
                self._trade(seller, t_s)

    def _bind_observers(self, t_s: int) -> None:
        simulation = self.context.simulation
        accidents = simulation.scenario.accidents
        links = {a.link_id for a in accidents if a.active_at(t_s)}
        if not links:
            return
        for vehicle_id in simulation.active_vehicles_on(links):
            if vehicle_id in self.sellers or len(self.sellers) >= len(self.vehicle_profiles):
                continue
            product = observe_accident(simulation.state, simulation.network, vehicle_id,
                                       accidents, self.config.market.observe_radius_m)
            if product is None:
                continue
            profile = self.vehicle_profiles[len(self.sellers)]
            self.sellers[vehicle_id] = SellerState(profile, vehicle_id, product)
            logger.info("t=%d vehicle %d observed the accident on link %d as %s",
                        t_s, vehicle_id, product.link_id, profile.id)

    def _may_propose(self, seller: SellerState) -> bool:
        if seller.sold or seller.proposals >= self.config.market.max_proposals_per_seller:
            return False
        ledger = self.context.ledger
        if ledger.balance(seller.profile.id) < ledger.proposal_fee:
            logger.warning("%s cannot pay the proposal fee", seller.profile.id)
            return False
        return True

    def _trade(self, seller: SellerState, t_s: int) -> None:
        ledger = self.context.ledger
        history_k = self.config.market.history_k
        value = self.context.value(seller.product, t_s)

        ask = seller_initial_ask(seller.profile, value, ledger.observation(history_k), self.params)
        proposal_id = ledger.submit_proposal(seller.profile.id, seller.product, ask, t_s)
        seller.proposals += 1

        request = DecisionRequest.build(self.controller, value, ask)
        response = decide(self.backend, self.controller, request, value,
                          ledger.observation(history_k), self.config.backend.on_error)

        if response.decision:
            transcript = immediate_agreement(
                self.controller.id, seller.profile.id, ask, seller_reservation(self.params),
                buyer_reservation(self.controller, value, self.params))
        else:
            logger.info("t=%d controller declined #%d: %s", t_s, proposal_id, response.reason)
            transcript = run_negotiation(self.controller, value, seller.profile, ask,
                                         self.config.pricing.max_rounds,
                                         self.config.pricing.concession_step, self.params)

        price, accepted = ask, False
        if transcript.agreed:
            blended = final_price(self.config.pricing.w, value, transcript)
            if ledger.balance(self.controller.id) >= blended:
                ledger.settle(proposal_id, self.controller.id, blended, t_s)
                seller.sold = True
                price, accepted = blended, True
                self.context.adjust_signals(seller.product, t_s)
            else:
                logger.warning("t=%d controller cannot afford %s for #%d",
                               t_s, blended, proposal_id)
        if not accepted:
            ledger.reject(proposal_id, self.controller.id, t_s)

        payoffs = outcome_payoffs(transcript, value, price, accepted, ledger.proposal_fee)
        self.context.outcomes.append(ProposalOutcome(
            proposal_id, t_s, seller.profile.id, ask, price, accepted, transcript, payoffs))


def run_once(config: ScenarioConfig, backend: Optional[DecisionBackend] = None) -> RunOutput:
    """
    Run one market scenario end to end.

    Args:
        config: Validated scenario config
        backend: Decision backend; defaults to the one backend.mode selects

    Returns:
        RunOutput with metrics, trades, negotiations and the event log

    Raises:
        TrafficError, MarketError, AgentError: From the underlying modules
    """
    context = RunContext.prepare(config)
    session = MarketSession(context, backend or make_backend(config))

    period = config.market.observe_period_s
    for t in range(config.run.horizon_s):
        if t % period == 0:
            session.trading_point(t)
        context.simulation.advance()

    return context.finish()
