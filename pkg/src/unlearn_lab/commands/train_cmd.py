##############################################################################
#
# Name: train_cmd.py
#
# Function:
#       TrainCommand: train the original model and fill the store
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
from unlearn_lab.harness.runner import run_train


class TrainCommand(BaseCommand):
    """Train the original classifier and persist it with its stored subset."""

    def execute(self) -> int:
        config = self.app.experiment
        store = self.app.store
        outcome = run_train(config, store, dataset=self.app.dataset)

        stored = sum(len(h) for h in outcome.subsets.values())
        self.console.print(
            f"[bold green]Original model[/bold green] {outcome.model.short_digest} "
            f"({outcome.model.iterations_total} iterations)"
        )
        self.console.print(
            f"Stored {stored} sample(s) over {len(outcome.subsets)} classes "
            f"({config.subset.strategy.value}, fraction {config.subset.fraction}) "
            f"in {store.root}"
        )
        forget = ", ".join(str(c) for c in config.forget.classes)
        self.print_report(outcome.report, title=f"Original model (forget classes: {forget})")
        return 0
