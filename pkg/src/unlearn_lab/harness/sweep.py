##############################################################################
#
# Name: sweep.py
#
# Function:
#       Method x strategy x mode sweeps over seeds, with recorded results
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

import json
import logging
import multiprocessing
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from unlearn_lab.config.experiment import ExperimentConfig, ForgetMode
from unlearn_lab.data.dataset import LabeledImageDataset, Split, load_dataset
from unlearn_lab.data.selection import rank_by_confidence
from unlearn_lab.data.subset import Strategy
from unlearn_lab.errors import DomainError, ExportError
from unlearn_lab.evalkit.metrics import MetricsReport, Scope, evaluate
from unlearn_lab.evalkit.table import ComparisonTable, compose_comparison_table
from unlearn_lab.harness.runner import (
    handle_forget_request,
    original_partition,
    populate_store,
    train_original,
)
from unlearn_lab.model.checkpoint import load_checkpoint, save_checkpoint
from unlearn_lab.model.config import BudgetMode
from unlearn_lab.model.state import ModelState
from unlearn_lab.store.model_store import ModelStore
from unlearn_lab.unlearn.request import Method

logger = logging.getLogger(__name__)

RECORDS_FILE = "records.jsonl"
STATUS_OK = "ok"
STATUS_FAILED = "failed"
ORIGINAL = "original"


@dataclass(frozen=True)
class SweepCell:
    """One grid point, run once per seed."""

    strategy: Strategy
    method: Method
    mode: ForgetMode

    @property
    def label(self) -> str:
        if self.mode is ForgetMode.REAL:
            return f"{self.method.label} {self.strategy.value}"
        return f"{self.method.label} {self.strategy.value} {self.mode.value}"

    @property
    def slug(self) -> str:
        return f"{self.strategy.value}-{self.method.value}-{self.mode.value}"


@dataclass(frozen=True)
class SweepRecord:
    """Outcome of one cell at one seed, as written to ``records.jsonl``.

    ``cell`` is None for the original-model record of a seed.
    """

    seed: int
    cell: SweepCell | None
    status: str
    report: MetricsReport | None = None
    iterations: int | None = None
    wall_time: float | None = None
    error: str | None = None
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def label(self) -> str:
        return self.cell.label if self.cell is not None else ORIGINAL

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"seed": self.seed, "label": self.label, "status": self.status}
        if self.cell is not None:
            out["strategy"] = self.cell.strategy.value
            out["method"] = self.cell.method.value
            out["mode"] = self.cell.mode.value
        if self.report is not None:
            out["report"] = self.report.to_dict()
        if self.iterations is not None:
            out["iterations"] = self.iterations
        if self.wall_time is not None:
            out["wall_time"] = round(self.wall_time, 3)
        if self.error is not None:
            out["error"] = self.error
        if self.config:
            out["config"] = self.config
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SweepRecord:
        cell = None
        if "method" in data:
            cell = SweepCell(
                Strategy(data["strategy"]), Method(data["method"]), ForgetMode(data["mode"])
            )
        report = data.get("report")
        return cls(
            seed=int(data["seed"]),
            cell=cell,
            status=str(data["status"]),
            report=MetricsReport.from_dict(report) if report else None,
            iterations=data.get("iterations"),
            wall_time=data.get("wall_time"),
            error=data.get("error"),
            config=dict(data.get("config", {})),
        )


@dataclass(frozen=True, eq=False)
class SweepOutcome:
    records: tuple[SweepRecord, ...]
    table: ComparisonTable
    root: Path

    @property
    def failed(self) -> list[SweepRecord]:
        return [r for r in self.records if r.status == STATUS_FAILED]


def run_cell(
    config: ExperimentConfig,
    cell: SweepCell,
    seed: int,
    base: ModelState | Path,
    cell_root: Path,
    dataset: LabeledImageDataset | None = None,
) -> SweepRecord:
    """Run one cell into its own store; failures become a failed record.

    ``base`` is the seed's original model or the path of its checkpoint;
    a worker process loads the checkpoint and dataset itself.
    """
    cell_config = config.with_subset(cell.strategy).with_seed(seed)
    recorded = {**cell_config.to_dict(), "cell": cell.slug}
    try:
        dataset = dataset or load_dataset(config.dataset)
        model = base if isinstance(base, ModelState) else load_checkpoint(base)
        store = ModelStore(cell_root)
        ranking = rank_by_confidence(model, dataset, Split.TRAIN)
        populate_store(store, cell_config, dataset, model, ranking)
        outcome = handle_forget_request(
            store,
            dataset,
            config.forget.classes,
            cell.mode,
            config.forget.budget,
            seed,
            method=cell.method,
            generator=config.generator,
            scope=config.scope,
            dump_dir=cell_root / "samples" if config.forget.dump_samples else None,
            retrain_learning_rate=config.forget.retrain_learning_rate,
        )
    except Exception as e:
        logger.warning("Sweep cell %s (seed %d) failed: %s", cell.slug, seed, e)
        error = f"{type(e).__name__}: {e}"
        return SweepRecord(seed, cell, STATUS_FAILED, error=error, config=recorded)
    result = outcome.result
    return SweepRecord(
        seed,
        cell,
        STATUS_OK,
        report=outcome.report,
        iterations=result.iterations_used if result else 0,
        wall_time=result.wall_time if result else 0.0,
        config=recorded,
    )


def _executor(config: ExperimentConfig) -> ProcessPoolExecutor:
    context = multiprocessing.get_context("spawn")
    return ProcessPoolExecutor(max_workers=config.sweep.max_workers, mp_context=context)


def run_sweep(
    config: ExperimentConfig,
    *,
    dataset: LabeledImageDataset | None = None,
    root: Path | None = None,
) -> SweepOutcome:
    """Run every grid cell for every seed and tabulate the results.

    The original model of each seed is trained once and shared read-only
    by that seed's cells; each cell gets its own store under
    ``root/seed_<s>/<cell>``. With ``sweep.parallel`` the cells of a seed
    run in worker processes. A failing cell is recorded as failed and the
    sweep continues.

    Writes ``records.jsonl`` plus ``table.md``, ``table.csv`` and
    ``table.txt`` under ``root`` (default ``<run_dir>/sweep``).

    Raises:
        DomainError: If the grid is empty.
    """
    cells = [SweepCell(*c) for c in config.sweep.cells()]
    if not cells:
        raise DomainError("sweep grid is empty")
    root = root or config.run_dir / "sweep"
    dataset = dataset or load_dataset(config.dataset)
    partition = original_partition(config, dataset.num_classes)
    logger.info("Sweep: %d cell(s) x %d seed(s) under %s", len(cells), len(config.seeds), root)

    records: list[SweepRecord] = []
    for seed in config.seeds:
        seed_config = config.with_seed(seed)
        seed_root = root / f"seed_{seed}"
        base, _ = train_original(seed_config, dataset, progress_store=None)
        base_path = save_checkpoint(base, seed_root / "original.pt")
        original = evaluate(base, dataset, partition, Scope.FULL_SPLIT)
        records.append(
            SweepRecord(seed, None, STATUS_OK, report=original, iterations=base.iterations_total)
        )
        jobs = [(cell, seed_root / cell.slug) for cell in cells]
        if config.sweep.parallel:
            with _executor(config) as pool:
                futures = [
                    pool.submit(run_cell, config, cell, seed, base_path, cell_root)
                    for cell, cell_root in jobs
                ]
                records.extend(f.result() for f in futures)
        else:
            records.extend(
                run_cell(config, cell, seed, base, cell_root, dataset) for cell, cell_root in jobs
            )

    write_records(records, root / RECORDS_FILE)
    table = table_from_records(records, title=_title(config))
    write_tables(table, root)
    return SweepOutcome(records=tuple(records), table=table, root=root)


def _title(config: ExperimentConfig) -> str:
    budget = config.forget.budget
    unit = "iterations" if budget.mode is BudgetMode.FIXED_ITERATIONS else "epochs"
    steps = f"{budget.limit} {unit}"
    return f"Forget {list(config.forget.classes)}: {config.subset.fraction:.0%} data, {steps}"


def table_from_records(records: Iterable[SweepRecord], *, title: str = "") -> ComparisonTable:
    """Aggregate records over seeds into a comparison table.

    Cells with no successful seed are left out; the original models form
    the unranked reference column.

    Raises:
        DomainError: If no cell has a successful record.
    """
    columns: dict[str, list[SweepRecord]] = {}
    originals: list[MetricsReport] = []
    for record in records:
        if record.status != STATUS_OK or record.report is None:
            continue
        if record.cell is None:
            originals.append(record.report)
        else:
            columns.setdefault(record.label, []).append(record)
    if not columns:
        raise DomainError("no successful sweep cells to tabulate")

    labels = list(columns)
    reports: list[Sequence[MetricsReport]] = [
        [r.report for r in columns[label] if r.report is not None] for label in labels
    ]
    iterations: list[float | None] = [
        float(np.mean([r.iterations or 0 for r in columns[label]])) for label in labels
    ]
    return compose_comparison_table(
        reports,
        labels,
        title=title,
        reference=originals or None,
        iterations=iterations,
    )


def write_records(records: Iterable[SweepRecord], path: Path) -> Path:
    """Write one JSON object per line."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            for record in records:
                f.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
    except OSError as e:
        raise ExportError(f"Cannot write sweep records to {path}: {e}") from e
    return path


def read_records(path: Path) -> list[SweepRecord]:
    """Read records written by ``write_records``.

    Raises:
        ExportError: If the file cannot be read or a line is malformed.
    """
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ExportError(f"Cannot read sweep records {path}: {e}") from e
    records = []
    for number, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            records.append(SweepRecord.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, ValueError) as e:
            raise ExportError(f"{path}:{number}: malformed record: {e}") from e
    return records


def write_tables(table: ComparisonTable, directory: Path) -> list[Path]:
    """Write the table as ``table.md``, ``table.csv`` and ``table.txt``."""
    outputs = {
        "table.md": table.to_markdown(),
        "table.csv": table.to_csv(),
        "table.txt": table.to_text(),
    }
    paths = []
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for name, text in outputs.items():
            path = directory / name
            path.write_text(text, encoding="utf-8")
            paths.append(path)
    except OSError as e:
        raise ExportError(f"Cannot write tables to {directory}: {e}") from e
    return paths
