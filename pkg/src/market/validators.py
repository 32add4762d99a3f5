"""
Precondition checks for ledger operations.

Every check runs before the ledger mutates, so a failing operation leaves
balances, proposals and history untouched.
"""

from decimal import Decimal
from typing import Dict, Optional

from src.types import ProposalStatus


class MarketError(Exception):
    """Base error for market operations."""
    pass


class DuplicateAgentError(MarketError):
    """Raised when registering an agent id twice."""
    pass


class UnknownAgentError(MarketError):
    """Raised when an agent id has no account."""
    pass


class InsufficientFundsError(MarketError):
    """Raised when a payment exceeds the payer's balance."""
    pass


class UnknownProposalError(MarketError):
    """Raised when a proposal id does not exist."""
    pass


class ProposalClosedError(MarketError):
    """Raised when acting on a proposal that is no longer open."""
    pass


class SettlementOrderError(MarketError):
    """Raised when a settlement would precede the last trade in the history."""
    pass


class ConservationError(MarketError):
    """Raised when balances and fee pool no longer sum to the endowments."""
    pass


def validate_amount(amount: Decimal, what: str) -> None:
    """
    Raises:
        ValueError: If the amount is negative
    """
    if amount < 0:
        raise ValueError(f"{what} cannot be negative, got {amount}")


def validate_new_agent(accounts: Dict[str, Decimal], agent_id: str, endowment: Decimal) -> None:
    """
    Validate an account registration.

    Args:
        accounts: Existing balances by agent id
        agent_id: Id to register
        endowment: Starting balance

    Raises:
        DuplicateAgentError: If the id already has an account
        ValueError: If the id is empty or the endowment negative
    """
    if not agent_id:
        raise ValueError("Agent id cannot be empty")
    if agent_id in accounts:
        raise DuplicateAgentError(f"Agent '{agent_id}' is already registered")
    validate_amount(endowment, "Endowment")


def validate_known_agent(accounts: Dict[str, Decimal], agent_id: str) -> None:
    """
    Raises:
        UnknownAgentError: If the agent has no account
    """
    if agent_id not in accounts:
        raise UnknownAgentError(f"Agent '{agent_id}' is not registered")


def validate_funds(accounts: Dict[str, Decimal], agent_id: str, amount: Decimal) -> None:
    """
    Check that an agent can pay an amount.

    Raises:
        UnknownAgentError: If the agent has no account
        InsufficientFundsError: If the balance is below the amount
    """
    validate_known_agent(accounts, agent_id)
    if accounts[agent_id] < amount:
        raise InsufficientFundsError(
            f"Agent '{agent_id}' has {accounts[agent_id]}, needs {amount}")


def validate_open(status: ProposalStatus, proposal_id: int) -> None:
    """
    Raises:
        ProposalClosedError: If the proposal is not open
    """
    if status is not ProposalStatus.OPEN:
        raise ProposalClosedError(f"Proposal {proposal_id} is already {status.value}")


def validate_settlement_time(last_settled_s: Optional[int], now_s: int) -> None:
    """
    Raises:
        SettlementOrderError: If now_s is earlier than the last settlement
    """
    if last_settled_s is not None and now_s < last_settled_s:
        raise SettlementOrderError(
            f"Settlement at {now_s} s precedes last trade at {last_settled_s} s")
