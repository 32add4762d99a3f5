"""
Scenario configuration.

Configs are trees of frozen dataclasses loaded from a flat text format:

    # comment
    network.rows=2
    demand.flow_vph=220
    agents.0.role=controller

Missing keys take defaults; unknown keys are errors. Any agents.* key
replaces the default agent list.
"""

import typing
from dataclasses import dataclass, field, fields, replace
from decimal import Decimal, InvalidOperation
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from src.types import DataProduct, Role, RiskPreference, Sensitivity
from src.utils import parse_bool, to_money
from src.traffic.demand import ArrivalPattern
from src.traffic.network import RoadNetwork, build_grid
from src.traffic.signals import SignalPlan
from src.traffic.simulator import AccidentEvent, Scenario
from src.agents.backend import BackendMode, OnError
from src.agents.policy import PolicyParams
from src.agents.profiles import AgentProfile
from src.agents.registry import AgentRegistry
from src.llm.client import DEFAULT_BASE_URL, EndpointConfig
from src.llm.prompts import DEFAULT_MODEL

DEFAULT_VEHICLE_ENDOWMENT = Decimal("30.00")
DEFAULT_CONTROLLER_ENDOWMENT = Decimal("100.00")


class ConfigError(Exception):
    """Base error for configuration problems."""
    pass


class ConfigParseError(ConfigError):
    """Raised for malformed lines, unknown keys and unconvertible values."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ConfigRangeError(ConfigError):
    """Raised when a value is outside its allowed range."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _require(condition: bool, key: str, message: str) -> None:
    if not condition:
        raise ConfigRangeError(key, message)


@dataclass(frozen=True)
class NetworkConfig:
    rows: int = 2
    cols: int = 2
    link_length_m: float = 500.0
    lanes: int = 3
    free_speed_mps: float = 13.9
    saturation_rate: float = 0.5

    def __post_init__(self):
        _require(self.rows >= 1, "network.rows", "must be >= 1")
        _require(self.cols >= 1, "network.cols", "must be >= 1")
        _require(self.link_length_m > 0, "network.link_length_m", "must be > 0")
        _require(self.lanes >= 1, "network.lanes", "must be >= 1")
        _require(self.free_speed_mps > 0, "network.free_speed_mps", "must be > 0")
        _require(self.saturation_rate > 0, "network.saturation_rate", "must be > 0")

    @property
    def link_count(self) -> int:
        pairs = self.rows * (self.cols - 1) + (self.rows - 1) * self.cols
        pairs += 2 * (self.rows + self.cols)
        return 2 * pairs


@dataclass(frozen=True)
class DemandConfig:
    flow_vph: float = 220.0
    seed: int = 0
    arrivals: ArrivalPattern = ArrivalPattern.FIXED

    def __post_init__(self):
        _require(self.flow_vph >= 0, "demand.flow_vph", "must be >= 0")


@dataclass(frozen=True)
class AccidentConfig:
    """
    Accident settings; severity 0 means no accident at all.

    blocked_green_s is the share of every green lost on the accident approach
    while vehicles merge past the wreck. The default of 27 s leaves 3 s of
    discharge per 30 s green, so 220 veh/h oversaturates the approach and a
    3 s split shift doubles its service.
    """
    link: int = 6
    position_m: float = 400.0
    start_s: int = 200
    end_s: int = 700
    severity: float = 0.5
    blocked_green_s: int = 27

    def __post_init__(self):
        _require(0 <= self.severity <= 1, "accident.severity", "must lie in [0, 1]")
        _require(self.blocked_green_s >= 0, "accident.blocked_green_s", "must be >= 0")
        _require(self.start_s >= 0, "accident.start_s", "must be >= 0")
        _require(self.end_s > self.start_s, "accident.end_s", "must be > accident.start_s")
        _require(self.position_m >= 0, "accident.position_m", "must be >= 0")
        _require(self.link >= 0, "accident.link", "must be >= 0")


@dataclass(frozen=True)
class SignalConfig:
    cycle_s: int = 60
    green_ns_s: int = 30
    green_ew_s: int = 30
    offset_step_s: int = 0
    adjustment_delta_s: int = 3

    def __post_init__(self):
        _require(self.green_ns_s >= 1, "signal.green_ns_s", "must be >= 1")
        _require(self.green_ew_s >= 1, "signal.green_ew_s", "must be >= 1")
        _require(self.green_ns_s + self.green_ew_s == self.cycle_s, "signal.cycle_s",
                 "must equal green_ns_s + green_ew_s")
        _require(self.offset_step_s >= 0, "signal.offset_step_s", "must be >= 0")
        _require(0 <= self.adjustment_delta_s < min(self.green_ns_s, self.green_ew_s),
                 "signal.adjustment_delta_s", "must lie in [0, smallest green)")


@dataclass(frozen=True)
class AgentConfig:
    """One agent; endowment defaults by role (30 vehicle, 100 controller)."""
    role: Role = Role.VEHICLE
    risk: RiskPreference = RiskPreference.CONSERVATIVE
    sensitivity: Sensitivity = Sensitivity.HIGH
    endowment: Optional[Decimal] = None

    def __post_init__(self):
        if self.endowment is None:
            default = (DEFAULT_CONTROLLER_ENDOWMENT if self.role is Role.CONTROLLER
                       else DEFAULT_VEHICLE_ENDOWMENT)
            object.__setattr__(self, "endowment", default)
        object.__setattr__(self, "endowment", to_money(self.endowment))
        _require(self.endowment >= 0, "agents.endowment", "must be >= 0")


def default_agents() -> Tuple[AgentConfig, ...]:
    return (
        AgentConfig(role=Role.CONTROLLER),
        AgentConfig(role=Role.VEHICLE),
        AgentConfig(role=Role.VEHICLE),
        AgentConfig(role=Role.VEHICLE),
    )


@dataclass(frozen=True)
class MarketConfig:
    proposal_fee: Decimal = Decimal("1.00")
    observe_period_s: int = 5
    observe_radius_m: float = 250.0
    max_proposals_per_seller: int = 3
    history_k: int = 5

    def __post_init__(self):
        _require(self.proposal_fee >= 0, "market.proposal_fee", "must be >= 0")
        _require(self.observe_period_s >= 1, "market.observe_period_s", "must be >= 1")
        _require(self.observe_radius_m > 0, "market.observe_radius_m", "must be > 0")
        _require(self.max_proposals_per_seller >= 1, "market.max_proposals_per_seller",
                 "must be >= 1")
        _require(self.history_k >= 0, "market.history_k", "must be >= 0")


@dataclass(frozen=True)
class PricingConfig:
    w: Decimal = Decimal("0.5")
    conversion_rate: float = 1.0
    aggressive_multiplier: Decimal = Decimal("1.3")
    ask_markup_aggressive: Decimal = Decimal("1.5")
    ask_markup_conservative: Decimal = Decimal("1.1")
    concession_step: Decimal = Decimal("1.00")
    max_rounds: int = 5

    def __post_init__(self):
        _require(0 <= self.w <= 1, "pricing.w", "must lie in [0, 1]")
        _require(self.conversion_rate >= 0, "pricing.conversion_rate", "must be >= 0")
        _require(self.aggressive_multiplier >= 0, "pricing.aggressive_multiplier", "must be >= 0")
        _require(self.ask_markup_aggressive >= 0, "pricing.ask_markup_aggressive", "must be >= 0")
        _require(self.ask_markup_conservative >= 0, "pricing.ask_markup_conservative",
                 "must be >= 0")
        _require(self.concession_step > 0, "pricing.concession_step", "must be > 0")
        _require(self.max_rounds >= 1, "pricing.max_rounds", "must be >= 1")


@dataclass(frozen=True)
class BackendConfig:
    mode: BackendMode = BackendMode.RULE
    base_url: str = DEFAULT_BASE_URL
    model: str = DEFAULT_MODEL
    timeout_s: float = 30.0
    retries: int = 2
    backoff_s: float = 1.0
    on_error: OnError = OnError.REJECT
    temperature: float = 0.0

    def __post_init__(self):
        _require(bool(self.base_url), "backend.base_url", "cannot be empty")
        _require(self.timeout_s > 0, "backend.timeout_s", "must be > 0")
        _require(self.retries >= 0, "backend.retries", "must be >= 0")
        _require(self.backoff_s >= 0, "backend.backoff_s", "must be >= 0")
        _require(0 <= self.temperature <= 2, "backend.temperature", "must lie in [0, 2]")


@dataclass(frozen=True)
class RunConfig:
    horizon_s: int = 1000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        _require(self.horizon_s >= 1, "run.horizon_s", "must be >= 1")
        _require(self.workers >= 1, "run.workers", "must be >= 1")


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete, validated description of one run."""
    network: NetworkConfig = field(default_factory=NetworkConfig)
    demand: DemandConfig = field(default_factory=DemandConfig)
    accident: AccidentConfig = field(default_factory=AccidentConfig)
    signal: SignalConfig = field(default_factory=SignalConfig)
    agents: Tuple[AgentConfig, ...] = field(default_factory=default_agents)
    market: MarketConfig = field(default_factory=MarketConfig)
    pricing: PricingConfig = field(default_factory=PricingConfig)
    backend: BackendConfig = field(default_factory=BackendConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def __post_init__(self):
        _require(self.accident.link < self.network.link_count, "accident.link",
                 f"must be < {self.network.link_count} for this grid")
        _require(self.accident.position_m <= self.network.link_length_m, "accident.position_m",
                 "must not exceed network.link_length_m")
        controllers = sum(1 for a in self.agents if a.role is Role.CONTROLLER)
        _require(controllers == 1, "agents", f"need exactly one controller, found {controllers}")
        _require(len(self.agents) > controllers, "agents", "need at least one vehicle")

    @property
    def demand_seed(self) -> int:
        """Seed for demand generation: run.seed picks the replicate, demand.seed the pattern."""
        return self.run.seed * 1_000_003 + self.demand.seed

    def with_preferences(self, risk: RiskPreference, sensitivity: Sensitivity,
                         flow_vph: Optional[float] = None) -> "ScenarioConfig":
        """
        Copy with the controller given the preferences and, optionally, a new flow.

        Vehicle agents keep their configured preferences, so sweep cells differ
        only on the buying side.
        """
        agents = tuple(replace(a, risk=risk, sensitivity=sensitivity)
                       if a.role is Role.CONTROLLER else a for a in self.agents)
        demand = self.demand if flow_vph is None else replace(self.demand, flow_vph=flow_vph)
        return replace(self, agents=agents, demand=demand)

    def build_network(self) -> RoadNetwork:
        n = self.network
        return build_grid(n.rows, n.cols, n.link_length_m, n.lanes, n.free_speed_mps)

    def accidents(self) -> List[AccidentEvent]:
        a = self.accident
        if a.severity == 0:
            return []
        return [AccidentEvent(a.link, a.position_m, a.start_s, a.end_s, a.severity,
                              a.blocked_green_s)]

    def build_scenario(self, network: Optional[RoadNetwork] = None) -> Scenario:
        return Scenario(
            network=network or self.build_network(),
            flow_vph=self.demand.flow_vph,
            accidents=self.accidents(),
            arrivals=self.demand.arrivals,
            saturation_rate=self.network.saturation_rate,
        )

    def build_plan(self, network: RoadNetwork) -> SignalPlan:
        s = self.signal
        return SignalPlan.fixed_time(network, s.cycle_s, s.green_ns_s, s.green_ew_s,
                                     s.offset_step_s)

    def accident_product(self, observed_at_s: int) -> DataProduct:
        """The product a vehicle would report for the configured accident."""
        a = self.accident
        return DataProduct(a.link, a.position_m, observed_at_s, a.severity or 1.0,
                           self.demand.flow_vph)

    def profiles(self) -> List[AgentProfile]:
        """Profiles with ids controller, vehicle-1, vehicle-2, ... in config order."""
        profiles = []
        vehicle_number = 0
        for agent in self.agents:
            if agent.role is Role.CONTROLLER:
                agent_id = "controller"
            else:
                vehicle_number += 1
                agent_id = f"vehicle-{vehicle_number}"
            profiles.append(AgentProfile(agent_id, agent.role, agent.risk, agent.sensitivity,
                                         agent.endowment))
        return profiles

    def build_registry(self) -> AgentRegistry:
        return AgentRegistry(self.profiles())

    def policy_params(self) -> PolicyParams:
        p = self.pricing
        return PolicyParams(
            aggressive_multiplier=p.aggressive_multiplier,
            ask_markup_aggressive=p.ask_markup_aggressive,
            ask_markup_conservative=p.ask_markup_conservative,
            proposal_fee=self.market.proposal_fee,
        )

    def endpoint(self) -> EndpointConfig:
        """Endpoint settings; the API key comes from the environment."""
        b = self.backend
        return EndpointConfig.from_env(base_url=b.base_url, model=b.model,
                                       timeout_s=b.timeout_s, retries=b.retries,
                                       backoff_s=b.backoff_s)


SECTIONS: Dict[str, type] = {
    "network": NetworkConfig,
    "demand": DemandConfig,
    "accident": AccidentConfig,
    "signal": SignalConfig,
    "market": MarketConfig,
    "pricing": PricingConfig,
    "backend": BackendConfig,
    "run": RunConfig,
}


def _field_types(cls: type) -> Dict[str, Any]:
    return {f.name: f.type for f in fields(cls)}


def _convert(raw: str, target: Any) -> Any:
    """
    Convert a raw string to a field type.

    Raises:
        ValueError: If the string does not represent a value of the type
    """
    if typing.get_origin(target) is typing.Union:
        target = next(arg for arg in typing.get_args(target) if arg is not type(None))
    if target is bool:
        return parse_bool(raw)
    if target is int:
        return int(raw)
    if target is float:
        return float(raw)
    if target is Decimal:
        try:
            value = Decimal(raw)
        except InvalidOperation:
            raise ValueError(f"'{raw}' is not a decimal number")
        if not value.is_finite():
            raise ValueError(f"'{raw}' is not finite")
        return value
    if isinstance(target, type) and issubclass(target, Enum):
        choices = ", ".join(member.value for member in target)
        try:
            return target(raw)
        except ValueError:
            raise ValueError(f"'{raw}' is not one of: {choices}")
    return raw


def _render(value: Any) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _build(values: Dict[str, Dict[str, Any]],
           agent_values: Dict[int, Dict[str, Any]]) -> ScenarioConfig:
    sections = {name: cls(**values.get(name, {})) for name, cls in SECTIONS.items()}
    if agent_values:
        indices = sorted(agent_values)
        if indices != list(range(len(indices))):
            raise ConfigRangeError("agents", f"indices must run 0..n-1, got {indices}")
        agents = tuple(AgentConfig(**agent_values[i]) for i in indices)
    else:
        agents = default_agents()
    return ScenarioConfig(agents=agents, **sections)


def parse_config_lines(lines: List[str]) -> ScenarioConfig:
    """
    Parse config lines into a ScenarioConfig.

    Args:
        lines: Lines of the config text

    Returns:
        Validated ScenarioConfig

    Raises:
        ConfigParseError: On malformed lines, unknown keys or bad values
        ConfigRangeError: On out-of-range values
    """
    values: Dict[str, Dict[str, Any]] = {}
    agent_values: Dict[int, Dict[str, Any]] = {}
    agent_types = _field_types(AgentConfig)

    for number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigParseError(number, f"expected key=value, got '{text}'")
        key, raw = (part.strip() for part in text.split("=", 1))
        parts = key.split(".")

        try:
            if parts[0] == "agents" and len(parts) == 3:
                if not parts[1].isdigit():
                    raise ConfigParseError(number, f"agent index must be a number in '{key}'")
                if parts[2] not in agent_types:
                    raise ConfigParseError(number, f"unknown key '{key}'")
                agent_values.setdefault(int(parts[1]), {})[parts[2]] = _convert(
                    raw, agent_types[parts[2]])
            elif len(parts) == 2 and parts[0] in SECTIONS:
                types = _field_types(SECTIONS[parts[0]])
                if parts[1] not in types:
                    raise ConfigParseError(number, f"unknown key '{key}'")
                values.setdefault(parts[0], {})[parts[1]] = _convert(raw, types[parts[1]])
            else:
                raise ConfigParseError(number, f"unknown key '{key}'")
        except ValueError as e:
            raise ConfigParseError(number, f"bad value for '{key}': {e}")

    return _build(values, agent_values)


def loads_config(text: str) -> ScenarioConfig:
    return parse_config_lines(text.splitlines())


def load_config(path: str) -> ScenarioConfig:
    """
    Load a config file.

    Raises:
        ConfigError: If the file cannot be read
        ConfigParseError: On malformed content
        ConfigRangeError: On out-of-range values
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config '{path}': {e}")
    return loads_config(text)


def config_items(config: ScenarioConfig) -> List[Tuple[str, str]]:
    """Every setting as (dotted key, rendered value), in a fixed order."""
    items: List[Tuple[str, str]] = []
    for name in ("network", "demand", "accident", "signal"):
        section = getattr(config, name)
        items.extend((f"{name}.{f.name}", _render(getattr(section, f.name)))
                     for f in fields(section))
    for index, agent in enumerate(config.agents):
        items.extend((f"agents.{index}.{f.name}", _render(getattr(agent, f.name)))
                     for f in fields(agent))
    for name in ("market", "pricing", "backend", "run"):
        section = getattr(config, name)
        items.extend((f"{name}.{f.name}", _render(getattr(section, f.name)))
                     for f in fields(section))
    return items


def render_config(config: ScenarioConfig) -> str:
    """Render a config in the file format; loading the text gives an equal config."""
    return "".join(f"{key}={value}\n" for key, value in config_items(config))


def apply_overrides(config: ScenarioConfig, overrides: Mapping[str, Any]) -> ScenarioConfig:
    """
    Copy a config with dotted-key overrides applied.

    Values may be strings or plain Python values. If any agents.* key is
    given, the agent list is rebuilt from the override keys alone.

    Raises:
        ConfigParseError: On unknown keys or bad values
        ConfigRangeError: On out-of-range values
    """
    rendered = {key: value for key, value in config_items(config)}
    if any(key.startswith("agents.") for key in overrides):
        rendered = {k: v for k, v in rendered.items() if not k.startswith("agents.")}
    for key, value in overrides.items():
        rendered[key] = _render(value) if not isinstance(value, str) else value
    return parse_config_lines([f"{key}={value}" for key, value in rendered.items()])
