"""
Trade ledger for the data market.

Holds agent accounts, the fee pool, proposals and the public trade history,
and keeps a journal of every mutation that can be written as JSON Lines
and replayed.
"""

import json
import logging
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from src.types import (
    DataProduct, LedgerEntry, OperationType, ProductDigest, ProposalStatus,
)
from src.utils import to_money
from src.agents.profiles import MarketObservation, DEFAULT_HISTORY_K
from src.market.validators import (
    ConservationError,
    UnknownProposalError,
    validate_amount,
    validate_funds,
    validate_known_agent,
    validate_new_agent,
    validate_open,
    validate_settlement_time,
)

logger = logging.getLogger(__name__)

DEFAULT_PROPOSAL_FEE = Decimal("1.00")


@dataclass
class Proposal:
    """
    An offer to sell one data product.

    Buyers see the digest and the ask; the full product is only handed
    over in the TradeRecord on settlement.
    """
    id: int
    seller_id: str
    digest: ProductDigest
    ask_price: Decimal
    created_s: int
    product: DataProduct = field(repr=False, compare=False)
    status: ProposalStatus = ProposalStatus.OPEN
    closed_s: Optional[int] = None


@dataclass(frozen=True)
class TradeRecord:
    """A settled trade in the public history."""
    proposal_id: int
    buyer_id: str
    seller_id: str
    price: Decimal
    settled_s: int
    delivered: DataProduct


class TradeLedger:
    """Single-owner state machine over accounts, proposals and trades."""

    def __init__(self, proposal_fee: Decimal = DEFAULT_PROPOSAL_FEE):
        """
        Initialize an empty ledger.

        Args:
            proposal_fee: Fee charged to a seller for each proposal
        """
        self.proposal_fee = to_money(proposal_fee)
        validate_amount(self.proposal_fee, "Proposal fee")
        self.accounts: Dict[str, Decimal] = {}
        self.fee_pool = Decimal("0.00")
        self.trades: List[TradeRecord] = []
        self.proposals: Dict[int, Proposal] = {}
        self.rejections: List[Tuple[int, Decimal]] = []
        self.journal: List[LedgerEntry] = []
        self._endowments = Decimal("0.00")
        self._transaction_counter = 0

    def _record(self, operation: OperationType, t_s: int, agent_id: str,
                proposal_id: Optional[int] = None, counterparty_id: Optional[str] = None,
                amount: Optional[Decimal] = None, product: Optional[DataProduct] = None) -> None:
        self._transaction_counter += 1
        self.journal.append(LedgerEntry(
            transaction_id=self._transaction_counter,
            operation=operation,
            t_s=t_s,
            agent_id=agent_id,
            proposal_id=proposal_id,
            counterparty_id=counterparty_id,
            amount=amount,
            product=product,
        ))

    def register_agent(self, agent_id: str, endowment: Decimal, now_s: int = 0) -> None:
        """
        Open an account.

        Args:
            agent_id: Unique agent id
            endowment: Starting balance (>= 0)
            now_s: Simulation time of the registration

        Raises:
            DuplicateAgentError: If the id is taken
        """
        endowment = to_money(endowment)
        validate_new_agent(self.accounts, agent_id, endowment)
        self.accounts[agent_id] = endowment
        self._endowments += endowment
        self._record(OperationType.REGISTER, now_s, agent_id, amount=endowment)
        logger.debug("Registered %s with %s", agent_id, endowment)

    def balance(self, agent_id: str) -> Decimal:
        validate_known_agent(self.accounts, agent_id)
        return self.accounts[agent_id]

    def proposal(self, proposal_id: int) -> Proposal:
        """
        Raises:
            UnknownProposalError: If no such proposal exists
        """
        try:
            return self.proposals[proposal_id]
        except KeyError:
            raise UnknownProposalError(f"Proposal {proposal_id} does not exist")

    @property
    def open_proposals(self) -> List[Proposal]:
        return [p for p in self.proposals.values() if p.status is ProposalStatus.OPEN]

    def submit_proposal(self, seller_id: str, product: DataProduct, ask_price: Decimal,
                        now_s: int) -> int:
        """
        Post a proposal and charge the proposal fee.

        Args:
            seller_id: Selling agent
            product: Product offered; only its digest is public
            ask_price: Asking price (>= 0)
            now_s: Simulation time

        Returns:
            New proposal id, strictly greater than any earlier one

        Raises:
            UnknownAgentError: If the seller has no account
            InsufficientFundsError: If the seller cannot pay the fee
        """
        ask_price = to_money(ask_price)
        validate_amount(ask_price, "Ask price")
        validate_funds(self.accounts, seller_id, self.proposal_fee)

        proposal_id = len(self.proposals) + 1
        self.accounts[seller_id] -= self.proposal_fee
        self.fee_pool += self.proposal_fee
        self.proposals[proposal_id] = Proposal(
            id=proposal_id,
            seller_id=seller_id,
            digest=product.digest(),
            ask_price=ask_price,
            created_s=now_s,
            product=product,
        )
        self._record(OperationType.PROPOSE, now_s, seller_id, proposal_id=proposal_id,
                     amount=ask_price, product=product)
        logger.info("t=%d %s proposed #%d at %s", now_s, seller_id, proposal_id, ask_price)
        return proposal_id

    def settle(self, proposal_id: int, buyer_id: str, price: Decimal, now_s: int) -> TradeRecord:
        """
        Close a proposal as a trade and transfer the price.

        Args:
            proposal_id: Open proposal to settle
            buyer_id: Paying agent
            price: Agreed price (>= 0)
            now_s: Simulation time, not earlier than the last trade

        Returns:
            TradeRecord carrying the full product

        Raises:
            UnknownProposalError: If the proposal does not exist
            ProposalClosedError: If the proposal is not open
            InsufficientFundsError: If the buyer cannot pay
            SettlementOrderError: If now_s is earlier than the last trade
        """
        proposal = self.proposal(proposal_id)
        validate_open(proposal.status, proposal_id)
        price = to_money(price)
        validate_amount(price, "Price")
        validate_funds(self.accounts, buyer_id, price)
        validate_settlement_time(self.trades[-1].settled_s if self.trades else None, now_s)

        self.accounts[buyer_id] -= price
        self.accounts[proposal.seller_id] += price
        proposal.status = ProposalStatus.ACCEPTED
        proposal.closed_s = now_s
        record = TradeRecord(
            proposal_id=proposal_id,
            buyer_id=buyer_id,
            seller_id=proposal.seller_id,
            price=price,
            settled_s=now_s,
            delivered=proposal.product,
        )
        self.trades.append(record)
        self._record(OperationType.SETTLE, now_s, buyer_id, proposal_id=proposal_id,
                     counterparty_id=proposal.seller_id, amount=price)
        logger.info("t=%d %s bought #%d from %s for %s",
                    now_s, buyer_id, proposal_id, proposal.seller_id, price)
        return record

    def reject(self, proposal_id: int, buyer_id: str, now_s: int) -> None:
        """
        Close a proposal without a trade; the seller's fee stays in the pool.

        Raises:
            UnknownProposalError: If the proposal does not exist
            ProposalClosedError: If the proposal is not open
        """
        proposal = self.proposal(proposal_id)
        validate_open(proposal.status, proposal_id)
        validate_known_agent(self.accounts, buyer_id)

        proposal.status = ProposalStatus.REJECTED
        proposal.closed_s = now_s
        self.rejections.append((now_s, proposal.ask_price))
        self._record(OperationType.REJECT, now_s, buyer_id, proposal_id=proposal_id,
                     counterparty_id=proposal.seller_id)
        logger.info("t=%d %s rejected #%d", now_s, buyer_id, proposal_id)

    def expire(self, proposal_id: int, now_s: int) -> None:
        proposal = self.proposal(proposal_id)
        validate_open(proposal.status, proposal_id)
        proposal.status = ProposalStatus.EXPIRED
        proposal.closed_s = now_s
        self._record(OperationType.EXPIRE, now_s, proposal.seller_id, proposal_id=proposal_id)

    def expire_open(self, now_s: int) -> List[int]:
        """Expire every open proposal; returns the expired ids."""
        expired = [p.id for p in self.open_proposals]
        for proposal_id in expired:
            self.expire(proposal_id, now_s)
        if expired:
            logger.info("t=%d expired %d open proposals", now_s, len(expired))
        return expired

    def public_history(self, up_to_s: int) -> List[TradeRecord]:
        """All trades settled at or before up_to_s, oldest first."""
        return [trade for trade in self.trades if trade.settled_s <= up_to_s]

    def total_spend(self, buyer_id: str) -> Decimal:
        return sum((t.price for t in self.trades if t.buyer_id == buyer_id), Decimal("0.00"))

    def observation(self, k: int = DEFAULT_HISTORY_K) -> MarketObservation:
        """Aggregate market view offered to agents: open count and the last k prices."""
        return MarketObservation(
            open_proposals=len(self.open_proposals),
            recent_trade_prices=tuple(t.price for t in self.trades[-k:]) if k else (),
            recent_rejection_prices=tuple(p for _, p in self.rejections[-k:]) if k else (),
            k=k,
        )

    def check_conservation(self) -> None:
        """
        Raises:
            ConservationError: If balances plus fee pool differ from total endowments
                or any balance is negative
        """
        held = sum(self.accounts.values(), Decimal("0.00")) + self.fee_pool
        if held != self._endowments:
            raise ConservationError(f"Ledger holds {held}, endowments total {self._endowments}")
        negative = [agent for agent, balance in self.accounts.items() if balance < 0]
        if negative:
            raise ConservationError(f"Negative balances: {negative}")

    def write_journal(self, path: str) -> None:
        """
        Write the journal as JSON Lines.

        Args:
            path: Output file, parent directories are created
        """
        journal_file = Path(path)
        journal_file.parent.mkdir(parents=True, exist_ok=True)
        with open(journal_file, "w", encoding="utf-8") as f:
            for entry in self.journal:
                json.dump(entry.to_dict(), f, ensure_ascii=False, sort_keys=True)
                f.write("\n")

    @classmethod
    def from_journal(cls, path: str,
                     proposal_fee: Decimal = DEFAULT_PROPOSAL_FEE) -> "TradeLedger":
        """
        Rebuild a ledger by replaying a journal file.

        Args:
            path: JSON Lines journal written by write_journal
            proposal_fee: Fee in force when the journal was written

        Returns:
            Ledger equal to the one that wrote the journal

        Raises:
            IOError: If the file cannot be read or parsed
            MarketError: If an entry cannot be replayed
        """
        entries: List[LedgerEntry] = []
        try:
            with open(path, "r", encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if line:
                        entries.append(LedgerEntry.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, ValueError) as e:
            raise IOError(f"Error reading journal file: {e}")

        ledger = cls(proposal_fee=proposal_fee)
        for entry in entries:
            if entry.operation is OperationType.REGISTER:
                ledger.register_agent(entry.agent_id, entry.amount, entry.t_s)
            elif entry.operation is OperationType.PROPOSE:
                ledger.submit_proposal(entry.agent_id, entry.product, entry.amount, entry.t_s)
            elif entry.operation is OperationType.SETTLE:
                ledger.settle(entry.proposal_id, entry.agent_id, entry.amount, entry.t_s)
            elif entry.operation is OperationType.REJECT:
                ledger.reject(entry.proposal_id, entry.agent_id, entry.t_s)
            elif entry.operation is OperationType.EXPIRE:
                ledger.expire(entry.proposal_id, entry.t_s)
        ledger.check_conservation()
        return ledger
