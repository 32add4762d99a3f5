"""
Core data type definitions shared across the simulator packages.
"""

from enum import Enum
from dataclasses import dataclass
from decimal import Decimal
from typing import Any, Optional, Dict


class Role(Enum):
    """Market role of an agent."""
    VEHICLE = "vehicle"
    CONTROLLER = "controller"


class RiskPreference(Enum):
    """Risk attitude of an agent."""
    AGGRESSIVE = "aggressive"
    CONSERVATIVE = "conservative"


class Sensitivity(Enum):
    """How precisely an agent's decisions track numeric data value."""
    HIGH = "high"
    LOW = "low"


class ProposalStatus(Enum):
    """Lifecycle of a market proposal."""
    OPEN = "open"
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    EXPIRED = "expired"


class OperationType(Enum):
    """Types of operations that can be recorded in the market journal."""
    REGISTER = "REGISTER"
    PROPOSE = "PROPOSE"
    SETTLE = "SETTLE"
    REJECT = "REJECT"
    EXPIRE = "EXPIRE"


@dataclass(frozen=True)
class DataProduct:
    """A tradable accident observation made by a connected vehicle."""
    link_id: int
    position_m: float
    observed_at_s: int
    severity: float
    observed_flow_vph: float

    def __post_init__(self):
        """Validate product fields."""
        if self.observed_at_s < 0:
            raise ValueError("observed_at_s cannot be negative")
        if not 0 < self.severity <= 1:
            raise ValueError("severity must lie in (0, 1]")

    def digest(self) -> "ProductDigest":
        """The pre-trade view a buyer is allowed to see."""
        return ProductDigest(link_id=self.link_id, observed_at_s=self.observed_at_s)

    def to_dict(self) -> Dict[str, Any]:
        """Convert product to dictionary for JSON serialization."""
        return {
            "link_id": self.link_id,
            "position_m": self.position_m,
            "observed_at_s": self.observed_at_s,
            "severity": self.severity,
            "observed_flow_vph": self.observed_flow_vph,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DataProduct":
        """Create product from dictionary."""
        return cls(
            link_id=int(data["link_id"]),
            position_m=float(data["position_m"]),
            observed_at_s=int(data["observed_at_s"]),
            severity=float(data["severity"]),
            observed_flow_vph=float(data["observed_flow_vph"]),
        )


@dataclass(frozen=True)
class ProductDigest:
    """Link area and observation time of a product; severity and flow stay hidden."""
    link_id: int
    observed_at_s: int

    def matches(self, product: DataProduct) -> bool:
        """Check that a delivered product is the one that was advertised."""
        return product.digest() == self


@dataclass
class LedgerEntry:
    """Represents a single journal entry recording a market operation."""
    transaction_id: int
    operation: OperationType
    t_s: int
    agent_id: str
    proposal_id: Optional[int] = None
    counterparty_id: Optional[str] = None
    amount: Optional[Decimal] = None
    product: Optional[DataProduct] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert ledger entry to dictionary for JSON serialization."""
        return {
            "transaction_id": self.transaction_id,
            "operation": self.operation.value,
            "t_s": self.t_s,
            "agent_id": self.agent_id,
            "proposal_id": self.proposal_id,
            "counterparty_id": self.counterparty_id,
            "amount": None if self.amount is None else str(self.amount),
            "product": None if self.product is None else self.product.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LedgerEntry":
        """Create ledger entry from dictionary."""
        amount = data.get("amount")
        product = data.get("product")
        return cls(
            transaction_id=data["transaction_id"],
            operation=OperationType(data["operation"]),
            t_s=data["t_s"],
            agent_id=data["agent_id"],
            proposal_id=data.get("proposal_id"),
            counterparty_id=data.get("counterparty_id"),
            amount=None if amount is None else Decimal(amount),
            product=None if product is None else DataProduct.from_dict(product),
        )
