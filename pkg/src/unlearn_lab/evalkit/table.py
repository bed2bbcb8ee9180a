##############################################################################
#
# Name: table.py
#
# Function:
#       Comparison tables over MetricsReports: text (rich), Markdown, CSV
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

import csv
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from io import StringIO

import numpy as np
from rich.console import Console
from rich.table import Table

from unlearn_lab.errors import DomainError
from unlearn_lab.evalkit.metrics import MetricsReport

ABSENT = "-"


@dataclass(frozen=True)
class RowSpec:
    """One metric row: report attribute, title, and ranking direction."""

    key: str
    title: str
    higher_is_better: bool


ROWS = (
    RowSpec("acc_retain_train", "ACC_r ↑", True),
    RowSpec("acc_forget_train", "ACC_f ↓", False),
    RowSpec("acc_retain_test", "ACC'_r ↑", True),
    RowSpec("acc_forget_test", "ACC'_f ↓", False),
)

ITERATIONS_TITLE = "Iterations"


class Mark(str, Enum):
    BEST = "best"
    SECOND = "second"


RICH_STYLES = {Mark.BEST: "bold", Mark.SECOND: "underline"}


@dataclass(frozen=True)
class Cell:
    """Mean (and sample deviation across seeds) of one metric in one column."""

    mean: float | None
    std: float | None = None
    n: int = 0
    mark: Mark | None = None

    def text(self) -> str:
        if self.mean is None:
            return ABSENT
        if self.std is None:
            return f"{self.mean:.2f}"
        return f"{self.mean:.2f} ± {self.std:.2f}"


@dataclass(frozen=True)
class ComparisonTable:
    """A metrics grid: one column per method/setting, one row per metric.

    When ``reference`` is set the first column is a reference (e.g. the
    original model) that is shown but never ranked.
    """

    title: str
    columns: tuple[str, ...]
    row_titles: tuple[str, ...]
    cells: tuple[tuple[Cell, ...], ...]
    iterations: tuple[float | None, ...] | None = None
    reference: str | None = None

    def mark(self, row: int, column: int) -> Mark | None:
        return self.cells[row][column].mark

    def _iteration_texts(self) -> list[str]:
        return [ABSENT if v is None else f"{v:g}" for v in self.iterations or ()]

    def to_markdown(self) -> str:
        """Render as a Markdown table: best in ``**bold**``, second in ``<u>underline</u>``."""
        output = StringIO()
        if self.title:
            output.write(f"## {self.title}\n\n")
        output.write("| Metric | " + " | ".join(self.columns) + " |\n")
        output.write("|---" * (len(self.columns) + 1) + "|\n")
        for title, row in zip(self.row_titles, self.cells, strict=True):
            texts = []
            for cell in row:
                text = cell.text()
                if cell.mark is Mark.BEST:
                    text = f"**{text}**"
                elif cell.mark is Mark.SECOND:
                    text = f"<u>{text}</u>"
                texts.append(text)
            output.write(f"| {title} | " + " | ".join(texts) + " |\n")
        if self.iterations is not None:
            output.write(f"| {ITERATIONS_TITLE} | " + " | ".join(self._iteration_texts()) + " |\n")
        return output.getvalue()

    def to_csv(self) -> str:
        """Render as CSV with separate mean and std columns per setting."""
        output = StringIO()
        writer = csv.writer(output, lineterminator="\n")
        header = ["metric"]
        for column in self.columns:
            header += [column, f"{column} std"]
        writer.writerow(header)
        for title, row in zip(self.row_titles, self.cells, strict=True):
            values: list[str] = [title]
            for cell in row:
                values.append("" if cell.mean is None else repr(cell.mean))
                values.append("" if cell.std is None else repr(cell.std))
            writer.writerow(values)
        if self.iterations is not None:
            values = [ITERATIONS_TITLE]
            for v in self.iterations:
                values += ["" if v is None else repr(v), ""]
            writer.writerow(values)
        return output.getvalue()

    def to_rich(self) -> Table:
        table = Table(title=self.title or None)
        table.add_column("Metric", style="cyan")
        for column in self.columns:
            table.add_column(column, justify="right")
        for title, row in zip(self.row_titles, self.cells, strict=True):
            texts = []
            for cell in row:
                style = RICH_STYLES[cell.mark] if cell.mark else ""
                texts.append(f"[{style}]{cell.text()}[/{style}]" if style else cell.text())
            table.add_row(title, *texts)
        if self.iterations is not None:
            table.add_row(ITERATIONS_TITLE, *self._iteration_texts())
        return table

    def to_text(self, width: int = 120) -> str:
        """Render as aligned plain text."""
        buffer = StringIO()
        console = Console(file=buffer, width=width, color_system=None, force_terminal=False)
        console.print(self.to_rich())
        return buffer.getvalue()


def _column_cells(reports: Sequence[MetricsReport]) -> list[Cell]:
    cells = []
    for spec in ROWS:
        values = [getattr(r, spec.key) for r in reports]
        present = np.array([v for v in values if v is not None], dtype=np.float64)
        if present.size == 0:
            cells.append(Cell(None))
            continue
        std = float(np.std(present, ddof=1)) if present.size > 1 else None
        cells.append(Cell(float(present.mean()), std, int(present.size)))
    return cells


def _rank_row(row: list[Cell], spec: RowSpec, ranked: range) -> None:
    scored = {c: mean for c in ranked if (mean := row[c].mean) is not None}
    if len(scored) < 2:
        return
    distinct = sorted(set(scored.values()), reverse=spec.higher_is_better)
    marks = {distinct[0]: Mark.BEST}
    if len(scored) >= 3 and len(distinct) >= 2:
        marks[distinct[1]] = Mark.SECOND
    for c, value in scored.items():
        if value in marks:
            row[c] = Cell(row[c].mean, row[c].std, row[c].n, marks[value])


def compose_comparison_table(
    reports: Sequence[MetricsReport | Sequence[MetricsReport]],
    labels: Sequence[str],
    *,
    title: str = "",
    reference: MetricsReport | Sequence[MetricsReport] | None = None,
    reference_label: str = "Original",
    iterations: Sequence[float | None] | None = None,
) -> ComparisonTable:
    """Build a comparison grid from reports.

    Each entry of ``reports`` is one column: a single report, or several
    (one per seed) shown as ``mean ± std``. Per metric row the best column
    is marked (highest for ↑ rows, lowest for ↓ rows, compared on the
    unrounded means, exact ties share the mark); with three or more
    ranked columns the second best is marked too. A single column is never marked.

    Args:
        reports: One report, or a list of seed reports, per column.
        labels: Column titles, aligned with ``reports``.
        title: Optional table title.
        reference: Optional reference column placed first and not ranked.
        reference_label: Title of the reference column.
        iterations: Optional per-column optimizer steps, shown unranked.

    Returns:
        The table.

    Raises:
        DomainError: If ``reports`` is empty or a length does not match.
    """
    if not reports:
        raise DomainError("no reports to tabulate")
    if len(labels) != len(reports):
        raise DomainError(f"{len(reports)} report column(s) but {len(labels)} label(s)")
    if iterations is not None and len(iterations) != len(reports):
        raise DomainError(
            f"{len(reports)} report column(s) but {len(iterations)} iteration value(s)"
        )

    groups = [[r] if isinstance(r, MetricsReport) else list(r) for r in reports]
    if any(not g for g in groups):
        raise DomainError("every column needs at least one report")
    columns = list(labels)
    iteration_row = list(iterations) if iterations is not None else None
    offset = 0
    if reference is not None:
        groups.insert(0, [reference] if isinstance(reference, MetricsReport) else list(reference))
        columns.insert(0, reference_label)
        if iteration_row is not None:
            iteration_row.insert(0, None)
        offset = 1

    by_column = [_column_cells(g) for g in groups]
    rows: list[list[Cell]] = [[col[i] for col in by_column] for i in range(len(ROWS))]
    ranked = range(offset, len(columns))
    for row, spec in zip(rows, ROWS, strict=True):
        _rank_row(row, spec, ranked)

    return ComparisonTable(
        title=title,
        columns=tuple(columns),
        row_titles=tuple(spec.title for spec in ROWS),
        cells=tuple(tuple(row) for row in rows),
        iterations=tuple(iteration_row) if iteration_row is not None else None,
        reference=reference_label if reference is not None else None,
    )
