"""
Parameter sweeps over traffic flow and agent preferences.

Cells run independently, optionally in a thread pool, and are merged in
cell order so the output does not depend on scheduling.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import List, Optional, Sequence

from src.types import RiskPreference, Sensitivity
from src.metrics.tables import (
    AcceptanceRow, PriceValueRow, acceptance_table, price_dispersion, price_value_table,
)
from src.harness.config import ScenarioConfig
from src.harness.reporters import (
    DISPERSION_HEADER, ERRORS_HEADER, HEATMAP_HEADER, PRICE_VALUE_HEADER,
    RunOutput, heatmap_rows, price_value_rows, write_csv, write_run_output,
)
from src.harness.runner import run_once
from src.utils import format_seconds

logger = logging.getLogger(__name__)

DEFAULT_FLOWS = (100.0, 200.0, 300.0, 400.0, 500.0)


@dataclass(frozen=True)
class SweepCell:
    flow_vph: float
    risk: RiskPreference
    sensitivity: Sensitivity

    @property
    def name(self) -> str:
        return f"flow{self.flow_vph:g}_{self.risk.value}_{self.sensitivity.value}"


@dataclass
class CellResult:
    cell: SweepCell
    output: Optional[RunOutput] = None
    error: Optional[str] = None


@dataclass
class SweepOutput:
    results: List[CellResult]
    heatmap: List[AcceptanceRow] = field(default_factory=list)
    price_value: List[PriceValueRow] = field(default_factory=list)

    @property
    def errors(self) -> List[CellResult]:
        return [r for r in self.results if r.error is not None]


def sweep_cells(flows: Sequence[float],
                risks: Sequence[RiskPreference] = tuple(RiskPreference),
                sensitivities: Sequence[Sensitivity] = tuple(Sensitivity)) -> List[SweepCell]:
    """Cross product of flows and preferences, flow-major."""
    return [SweepCell(flow, risk, sensitivity)
            for flow, risk, sensitivity in product(flows, risks, sensitivities)]


def run_cell(base: ScenarioConfig, cell: SweepCell) -> CellResult:
    """Run one cell; any failure is captured in the result."""
    try:
        config = base.with_preferences(cell.risk, cell.sensitivity, cell.flow_vph)
        return CellResult(cell, output=run_once(config))
    except Exception as e:
        logger.error("Sweep cell %s failed: %s", cell.name, e)
        return CellResult(cell, error=f"{type(e).__name__}: {e}")


def run_sweep(base: ScenarioConfig, cells: Sequence[SweepCell],
              workers: int = 1) -> SweepOutput:
    """
    Run every cell and aggregate the successful ones.

    Args:
        base: Config applied to every cell before its flow and preferences
        cells: Cells to run, at least one
        workers: Thread pool size; 1 runs cells sequentially

    Returns:
        SweepOutput with per-cell results and aggregate tables

    Raises:
        ValueError: If no cells are given
    """
    if not cells:
        raise ValueError("A sweep needs at least one cell")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda cell: run_cell(base, cell), cells))
    else:
        results = [run_cell(base, cell) for cell in cells]

    summaries = [r.output.summary for r in results if r.output is not None]
    output = SweepOutput(
        results=results,
        heatmap=acceptance_table(summaries),
        price_value=price_value_table(summaries),
    )
    logger.info("Sweep finished: %d cells, %d errors", len(results), len(output.errors))
    return output


def write_sweep_output(sweep: SweepOutput, out_dir: str) -> Path:
    """
    Write heatmap.csv, price_value.csv, dispersion.csv, errors.csv and one
    run directory per successful cell.
    """
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    write_csv(directory / "heatmap.csv", HEATMAP_HEADER, heatmap_rows(sweep.heatmap))
    write_csv(directory / "price_value.csv", PRICE_VALUE_HEADER,
              price_value_rows(sweep.price_value))
    top, bottom = price_dispersion(sweep.price_value)
    write_csv(directory / "dispersion.csv", DISPERSION_HEADER,
              [[format_seconds(top), format_seconds(bottom), str(len(sweep.price_value))]])
    write_csv(directory / "errors.csv", ERRORS_HEADER, [
        [f"{r.cell.flow_vph:g}", r.cell.risk.value, r.cell.sensitivity.value, r.error]
        for r in sweep.errors
    ])
    for result in sweep.results:
        if result.output is not None:
            write_run_output(result.output, str(directory / "runs" / result.cell.name))
    return directory
