##############################################################################
#
# Name: report_cmd.py
#
# Function:
#       ReportCommand: rebuild comparison tables from recorded sweep results
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

from pathlib import Path

from unlearn_lab.commands.base import BaseCommand
from unlearn_lab.harness.sweep import RECORDS_FILE, read_records, table_from_records


class ReportCommand(BaseCommand):
    """Print a comparison table from a ``records.jsonl`` file.

    Without a path the records of the configured run directory are used.
    """

    FORMATS = ("text", "markdown", "csv")

    def _records_path(self) -> Path:
        given = getattr(self.args, "records", None)
        if given:
            return Path(given)
        return self.app.experiment.run_dir / "sweep" / RECORDS_FILE

    def execute(self) -> int:
        path = self._records_path()
        table = table_from_records(read_records(path), title=getattr(self.args, "title", "") or "")
        fmt = getattr(self.args, "format", None) or "text"
        if fmt == "markdown":
            print(table.to_markdown(), end="")
        elif fmt == "csv":
            print(table.to_csv(), end="")
        else:
            self.console.print(table.to_rich())
        return 0
