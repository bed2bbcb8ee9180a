##############################################################################
#
# Name: base.py
#
# Function:
#       Base command class for unlearn-lab CLI commands
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

import argparse
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

from rich.console import Console
from rich.table import Table

from unlearn_lab.errors import UnlearnLabError

if TYPE_CHECKING:
    from unlearn_lab.app import App
    from unlearn_lab.evalkit.metrics import MetricsReport


class CommandError(UnlearnLabError):
    """Raised by commands to report a failure with a message and exit code."""

    def __init__(self, message: str, exit_code: int = 1) -> None:
        super().__init__(message)
        self.exit_code = exit_code


class BaseCommand(ABC):
    """Base class for all CLI commands."""

    Error = CommandError

    def __init__(self, app: App, args: argparse.Namespace) -> None:
        """Initialize the command.

        Args:
            app: The parent App instance.
            args: Parsed command-line arguments.
        """
        self._app = app
        self._args = args
        self._console: Console | None = None

    @property
    def app(self) -> App:
        return self._app

    @property
    def args(self) -> argparse.Namespace:
        return self._args

    @property
    def quiet(self) -> bool:
        return bool(getattr(self.args, "quiet", False))

    @property
    def console(self) -> Console:
        """Console for user-facing summaries; silent under ``--quiet``."""
        if self._console is None:
            self._console = Console(quiet=self.quiet)
        return self._console

    def print_report(self, report: MetricsReport, *, title: str) -> None:
        """Show the four accuracy cells of a report."""
        table = Table(title=title)
        table.add_column("Metric", style="cyan")
        table.add_column("Accuracy (%)", justify="right")
        table.add_column("Samples", justify="right")
        for name, value in report.cells().items():
            text = "-" if value is None else f"{value:.2f}"
            table.add_row(name, text, str(report.n_eval.get(name, 0)))
        self.console.print(table)

    @abstractmethod
    def execute(self) -> int:
        """Execute the command, return exit code.

        Commands raise ``BaseCommand.Error`` (or a library error) for
        expected failures; the App maps them to exit codes.

        Returns:
            Exit code (0 for success).
        """
        raise self.Error("Subclass does not implement execute()")
