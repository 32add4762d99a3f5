"""
Run and sweep outputs: CSV/JSON writers, reloading and console tables.

All files use fixed column orders, "\n" line endings and fixed decimal
places (2 for currency, 3 for seconds and percentages), so equal runs
produce identical bytes.
"""

import csv
import json
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

from src.types import LedgerEntry, RiskPreference, Sensitivity
from src.utils import format_money, format_seconds
from src.traffic.simulator import SimEvent
from src.metrics.waiting import MetricReport
from src.metrics.tables import (
    AcceptanceRow, PriceValueRow, RunSummary, TradeSample,
)

TRADES_HEADER = ["t_s", "seller", "buyer", "price", "accepted"]
METRICS_HEADER = ["phi_baseline", "phi_treated", "delta_phi", "improvement_pct",
                  "total_spend", "trades"]
NEGOTIATIONS_HEADER = ["trade_id", "round", "ask", "bid", "outcome"]
EVENTS_HEADER = ["t_s", "kind", "vehicle_id", "link_id"]
WAITING_HEADER = ["t_s", "phi_baseline", "phi_treated"]
HEATMAP_HEADER = ["risk", "sensitivity", "flow_vph", "accept_probability", "mean_price",
                  "mean_improvement_pct"]
PRICE_VALUE_HEADER = ["achieved_price", "improvement_pct", "risk", "sensitivity"]
DISPERSION_HEADER = ["std_top_quartile", "std_bottom_quartile", "trades"]
ERRORS_HEADER = ["flow_vph", "risk", "sensitivity", "error"]


@dataclass(frozen=True)
class TradeRow:
    """One closed proposal; price is the ask when rejected."""
    t_s: int
    seller: str
    buyer: str
    price: Decimal
    accepted: bool

    def to_row(self) -> List[str]:
        return [str(self.t_s), self.seller, self.buyer, format_money(self.price),
                "true" if self.accepted else "false"]

    @classmethod
    def from_row(cls, row: Sequence[str]) -> "TradeRow":
        return cls(int(row[0]), row[1], row[2], Decimal(row[3]), row[4] == "true")


@dataclass(frozen=True)
class NegotiationRow:
    trade_id: int
    round: int
    ask: Decimal
    bid: Decimal
    outcome: str

    def to_row(self) -> List[str]:
        return [str(self.trade_id), str(self.round), format_money(self.ask),
                format_money(self.bid), self.outcome]

    @classmethod
    def from_row(cls, row: Sequence[str]) -> "NegotiationRow":
        return cls(int(row[0]), int(row[1]), Decimal(row[2]), Decimal(row[3]), row[4])


@dataclass(frozen=True)
class WaitingRow:
    """Running average waiting time of both runs at one sample time."""
    t_s: int
    phi_baseline: float
    phi_treated: float

    def to_row(self) -> List[str]:
        return [str(self.t_s), format_seconds(self.phi_baseline),
                format_seconds(self.phi_treated)]

    @classmethod
    def from_row(cls, row: Sequence[str]) -> "WaitingRow":
        return cls(int(row[0]), float(row[1]), float(row[2]))


@dataclass(frozen=True)
class UtilityRow:
    proposal_id: int
    seller: str
    buyer_utility: Decimal
    seller_utility: Decimal

    def to_dict(self) -> Dict[str, Any]:
        return {
            "proposal_id": self.proposal_id,
            "seller": self.seller,
            "buyer_utility": format_money(self.buyer_utility),
            "seller_utility": format_money(self.seller_utility),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "UtilityRow":
        return cls(data["proposal_id"], data["seller"], Decimal(data["buyer_utility"]),
                   Decimal(data["seller_utility"]))


@dataclass
class RunOutput:
    """
    Everything a run produces.

    Attributes:
        report: Waiting-time metrics plus spend and trade count
        trades: One row per closed proposal
        negotiations: Round-level rows per proposal
        events: Treated run's simulation event log
        event_digest: SHA-256 of the event log
        config_echo: Rendered config the run used
        seed: Demand seed
        summary: Inputs to the sweep aggregate tables
        journal: Market journal entries
        waiting: Running average waiting time of both runs over time
        utilities: Buyer and seller payoff of every closed proposal
    """
    report: MetricReport
    trades: List[TradeRow]
    negotiations: List[NegotiationRow]
    events: List[SimEvent]
    event_digest: str
    config_echo: str
    seed: int
    summary: RunSummary
    journal: List[LedgerEntry] = field(default_factory=list)
    waiting: List[WaitingRow] = field(default_factory=list)
    utilities: List[UtilityRow] = field(default_factory=list)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    """Write a CSV file with a header row, creating parent directories."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def read_csv(path: Path) -> List[List[str]]:
    """Read a CSV file written by write_csv, without its header."""
    with open(path, "r", newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    return rows[1:]


def metrics_row(report: MetricReport) -> List[str]:
    return [
        format_seconds(report.phi_baseline),
        format_seconds(report.phi_treated),
        format_seconds(report.delta_phi),
        format_seconds(report.improvement_pct),
        format_money(report.total_spend),
        str(report.trades),
    ]


def _summary_to_dict(output: RunOutput) -> Dict[str, Any]:
    summary = output.summary
    return {
        "seed": output.seed,
        "event_digest": output.event_digest,
        "flow_vph": summary.flow_vph,
        "risk": summary.risk.value,
        "sensitivity": summary.sensitivity.value,
        "proposals": summary.proposals,
        "accepted": summary.accepted,
        "improvement_pct": summary.improvement_pct,
        "trades": [
            {"price": format_money(t.price), "improvement_pct": t.improvement_pct}
            for t in summary.trades
        ],
        "utilities": [u.to_dict() for u in output.utilities],
    }


def write_run_output(output: RunOutput, out_dir: str) -> Path:
    """
    Write a run's files into a directory.

    Files: trades.csv, metrics.csv, negotiations.csv, events.csv, waiting.csv,
    config.txt, summary.json and journal.jsonl.

    Args:
        output: Run output
        out_dir: Target directory, created if missing

    Returns:
        The directory path
    """
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    write_csv(directory / "trades.csv", TRADES_HEADER, (t.to_row() for t in output.trades))
    write_csv(directory / "metrics.csv", METRICS_HEADER, [metrics_row(output.report)])
    write_csv(directory / "negotiations.csv", NEGOTIATIONS_HEADER,
              (n.to_row() for n in output.negotiations))
    write_csv(directory / "events.csv", EVENTS_HEADER, (e.to_row() for e in output.events))
    write_csv(directory / "waiting.csv", WAITING_HEADER, (w.to_row() for w in output.waiting))
    (directory / "config.txt").write_text(output.config_echo, encoding="utf-8")
    (directory / "summary.json").write_text(
        json.dumps(_summary_to_dict(output), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    with open(directory / "journal.jsonl", "w", encoding="utf-8") as f:
        for entry in output.journal:
            f.write(json.dumps(entry.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
    return directory


def load_run_output(out_dir: str) -> RunOutput:
    """
    Reload a directory written by write_run_output.

    Raises:
        IOError: If a file is missing or malformed
    """
    directory = Path(out_dir)
    try:
        metrics = read_csv(directory / "metrics.csv")[0]
        report = MetricReport(
            phi_baseline=float(metrics[0]),
            phi_treated=float(metrics[1]),
            delta_phi=float(metrics[2]),
            improvement_pct=float(metrics[3]),
            total_spend=Decimal(metrics[4]),
            trades=int(metrics[5]),
        )
        trades = [TradeRow.from_row(r) for r in read_csv(directory / "trades.csv")]
        negotiations = [NegotiationRow.from_row(r)
                        for r in read_csv(directory / "negotiations.csv")]
        events = [SimEvent.from_row(r) for r in read_csv(directory / "events.csv")]
        waiting = [WaitingRow.from_row(r) for r in read_csv(directory / "waiting.csv")]
        config_echo = (directory / "config.txt").read_text(encoding="utf-8")
        data = json.loads((directory / "summary.json").read_text(encoding="utf-8"))
        utility_rows = [UtilityRow.from_dict(u) for u in data.get("utilities", [])]
        journal = []
        with open(directory / "journal.jsonl", "r", encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    journal.append(LedgerEntry.from_dict(json.loads(line)))
    except (OSError, IndexError, KeyError, ValueError) as e:
        raise IOError(f"Cannot load run output from {out_dir}: {e}")

    summary = RunSummary(
        risk=RiskPreference(data["risk"]),
        sensitivity=Sensitivity(data["sensitivity"]),
        flow_vph=data["flow_vph"],
        proposals=data["proposals"],
        accepted=data["accepted"],
        improvement_pct=data["improvement_pct"],
        trades=[TradeSample(Decimal(t["price"]), t["improvement_pct"]) for t in data["trades"]],
    )
    return RunOutput(report, trades, negotiations, events, data["event_digest"], config_echo,
                     data["seed"], summary, journal, waiting, utility_rows)


def heatmap_rows(rows: Sequence[AcceptanceRow]) -> List[List[str]]:
    return [
        [r.risk.value, r.sensitivity.value, f"{r.flow_vph:g}", format_seconds(r.accept_probability),
         format_money(r.mean_price), format_seconds(r.mean_improvement_pct)]
        for r in rows
    ]


def price_value_rows(rows: Sequence[PriceValueRow]) -> List[List[str]]:
    return [
        [format_money(r.achieved_price), format_seconds(r.improvement_pct), r.risk.value,
         r.sensitivity.value]
        for r in rows
    ]


def format_table(rows: List[Dict[str, Any]]) -> str:
    """
    Format rows as an aligned text table.

    Args:
        rows: List of dictionaries sharing the same keys

    Returns:
        Formatted table string
    """
    if not rows:
        return "(0 rows)"

    headers = list(rows[0].keys())
    widths = {h: max(len(str(h)), *(len(str(row.get(h, ""))) for row in rows)) for h in headers}

    header_line = " | ".join(str(h).ljust(widths[h]) for h in headers)
    separator = "-" * len(header_line)
    row_lines = [" | ".join(str(row.get(h, "")).ljust(widths[h]) for h in headers) for row in rows]

    output = [header_line, separator] + row_lines
    output.append(f"\n({len(rows)} row(s))")
    return "\n".join(output)
