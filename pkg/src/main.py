"""
Command-line entry point for the traffic data market simulator.

Subcommands:
    run       one scenario, written to an output directory
    sweep     flow x preference grid with aggregate tables
    oracle    twin-run valuation of the configured accident at one tick
    replay    canned decision script, no LLM required
    validate  load and check a config file

Exit codes: 0 on success, 1 on a config error, 2 on any other error.
"""

import argparse
import logging
import sys
from typing import List, Optional

from src.harness.config import ConfigError, load_config
from src.harness.reporters import RunOutput, format_table, write_run_output
from src.harness.replay import load_fixture, run_replay
from src.harness.runner import run_once
from src.harness.sweep import DEFAULT_FLOWS, run_sweep, sweep_cells, write_sweep_output
from src.agents.valuation import oracle_twin, seconds_saved
from src.metrics.waiting import average_waiting_time
from src.utils import format_money, format_seconds

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2


def _parse_flows(text: str) -> List[float]:
    try:
        flows = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"flows must be comma-separated numbers, got '{text}'")
    if not flows:
        raise argparse.ArgumentTypeError("at least one flow is required")
    return flows


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dtm-market",
                                     description="Traffic data market simulator")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for progress, -vv for per-tick detail")
    commands = parser.add_subparsers(dest="command", required=True)

    run_cmd = commands.add_parser("run", help="run one scenario")
    run_cmd.add_argument("config")
    run_cmd.add_argument("--out", required=True, help="output directory")

    sweep_cmd = commands.add_parser("sweep", help="sweep flows and agent preferences")
    sweep_cmd.add_argument("config")
    sweep_cmd.add_argument("--flows", type=_parse_flows, default=list(DEFAULT_FLOWS),
                           help="comma-separated veh/h per entry")
    sweep_cmd.add_argument("--out", required=True, help="output directory")
    sweep_cmd.add_argument("--workers", type=int, default=None,
                           help="parallel cells (defaults to run.workers)")

    oracle_cmd = commands.add_parser("oracle", help="value the configured accident report")
    oracle_cmd.add_argument("config")
    oracle_cmd.add_argument("--trade-time", type=int, required=True, dest="trade_time")

    replay_cmd = commands.add_parser("replay", help="replay a canned decision script")
    replay_cmd.add_argument("fixture")
    replay_cmd.add_argument("--out", default=None, help="optional output directory")

    validate_cmd = commands.add_parser("validate", help="check a config file")
    validate_cmd.add_argument("config")
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(asctime)s %(levelname)s %(name)s %(message)s")


def _print_run(output: RunOutput) -> None:
    report = output.report
    print(format_table([{
        "phi_baseline": format_seconds(report.phi_baseline),
        "phi_treated": format_seconds(report.phi_treated),
        "improvement_pct": format_seconds(report.improvement_pct),
        "total_spend": format_money(report.total_spend),
        "trades": report.trades,
    }]))


def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    output = run_once(config)
    directory = write_run_output(output, args.out)
    _print_run(output)
    print(f"Wrote {directory}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    workers = args.workers if args.workers is not None else config.run.workers
    if workers < 1:
        raise ConfigError("--workers must be >= 1")
    sweep = run_sweep(config, sweep_cells(args.flows), workers=workers)
    directory = write_sweep_output(sweep, args.out)
    print(format_table([{
        "risk": row.risk.value,
        "sensitivity": row.sensitivity.value,
        "flow_vph": f"{row.flow_vph:g}",
        "accept_probability": format_seconds(row.accept_probability),
        "mean_price": format_money(row.mean_price),
    } for row in sweep.heatmap]))
    for failed in sweep.errors:
        print(f"cell {failed.cell.name} failed: {failed.error}", file=sys.stderr)
    print(f"Wrote {directory}")
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    network = config.build_network()
    baseline, adjusted = oracle_twin(
        config.build_scenario(network), config.build_plan(network),
        config.accident_product(args.trade_time), args.trade_time, config.run.horizon_s,
        config.signal.adjustment_delta_s, seed=config.demand_seed)
    print(f"phi_baseline={format_seconds(average_waiting_time(baseline))}")
    print(f"phi_adjusted={format_seconds(average_waiting_time(adjusted))}")
    print(f"seconds_saved={format_seconds(seconds_saved(baseline, adjusted))}")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    output = run_replay(load_fixture(args.fixture))
    _print_run(output)
    if args.out:
        print(f"Wrote {write_run_output(output, args.out)}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    load_config(args.config)
    print("config OK")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "replay": cmd_replay,
    "validate": cmd_validate,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and dispatch a subcommand.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:]

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"Config error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except Exception as e:
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(f"Error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
