#!/usr/bin/env python
"""
DTM Market Sim Demo Script

This script walks through the main pieces of the simulator:
- Valuing an accident report by running the signal plan twice
- A full market run with the rule-based controller
- Replaying the shipped decision script and checking the ledger

Run with: python demo.py
"""

import os
import tempfile
from src.traffic.network import build_grid
from src.traffic.signals import SignalPlan
from src.traffic.simulator import AccidentEvent, Scenario
from src.types import DataProduct
from src.agents.valuation import oracle_value
from src.harness.config import ScenarioConfig, apply_overrides
from src.harness.reporters import format_table, write_run_output
from src.harness.replay import load_fixture, run_replay
from src.harness.runner import run_once
from src.market.ledger import TradeLedger
from src.utils import format_money, format_seconds

FIXTURE = os.path.join(os.path.dirname(__file__), "fixtures", "replay_220vph_conservative.json")


def print_header(text):
    """Print a formatted section header."""
    print("\n" + "=" * 70)
    print(f"  {text}")
    print("=" * 70 + "\n")


def print_subheader(text):
    print(f"\n{text}")
    print("-" * 70)


def demo_valuation():
    print_header("1. What is an accident report worth?")
    network = build_grid(1, 1)
    accident = AccidentEvent(link_id=0, position_m=400.0, start_s=0, end_s=1000, severity=0.5)
    scenario = Scenario(network, flow_vph=2000.0, accidents=[accident])
    plan = SignalPlan.fixed_time(network)

    rows = []
    for trade_time in (50, 100, 200, 400):
        product = DataProduct(0, 400.0, trade_time, 0.5, 2000.0)
        estimate = oracle_value(scenario, plan, product, trade_time, 1000, 3)
        rows.append({
            "trade_time": trade_time,
            "seconds_saved": format_seconds(estimate.seconds_saved),
            "value": format_money(estimate.currency_value),
        })
    print(format_table(rows))


def demo_run():
    print_header("2. One market run on the default 2x2 grid")
    results = []
    for delta in (0, 3, 6):
        config = apply_overrides(ScenarioConfig(), {"signal.adjustment_delta_s": delta})
        report = run_once(config).report
        results.append({
            "delta_s": delta,
            "phi_baseline": format_seconds(report.phi_baseline),
            "phi_treated": format_seconds(report.phi_treated),
            "improvement_pct": format_seconds(report.improvement_pct),
            "spend": format_money(report.total_spend),
            "trades": report.trades,
        })
    print(format_table(results))


def demo_replay():
    print_header("3. Replaying a canned decision script")
    output = run_replay(load_fixture(FIXTURE))
    print(format_table([{
        "t_s": t.t_s, "seller": t.seller, "price": format_money(t.price), "accepted": t.accepted,
    } for t in output.trades]))

    print_subheader("Balances rebuilt from the journal")
    with tempfile.TemporaryDirectory() as tmpdir:
        write_run_output(output, tmpdir)
        ledger = TradeLedger.from_journal(os.path.join(tmpdir, "journal.jsonl"))
    print(format_table([{"agent": agent, "balance": format_money(balance)}
                        for agent, balance in sorted(ledger.accounts.items())]))


def main():
    demo_valuation()
    demo_run()
    demo_replay()
    print("\nFor the command-line harness see QUICKSTART.md:")
    print("  python -m src.main run fixtures/default.conf --out out/default")


if __name__ == "__main__":
    main()
