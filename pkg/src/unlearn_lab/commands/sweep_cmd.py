##############################################################################
#
# Name: sweep_cmd.py
#
# Function:
#       SweepCommand: run the configured method/strategy/mode grid
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

from unlearn_lab.commands.base import BaseCommand
from unlearn_lab.harness.sweep import RECORDS_FILE, run_sweep


class SweepCommand(BaseCommand):
    """Run every sweep cell for every seed and print the comparison table."""

    def execute(self) -> int:
        outcome = run_sweep(self.app.experiment, dataset=self.app.dataset)
        self.console.print(outcome.table.to_rich())
        for record in outcome.failed:
            self.app.log.warning(f"Cell {record.label} (seed {record.seed}) failed: {record.error}")
        self.console.print(f"Records: {outcome.root / RECORDS_FILE}")
        return 1 if outcome.failed else 0
