##############################################################################
#
# Name: forget_cmd.py
#
# Function:
#       ForgetCommand: service a class forget request against the store
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

from dataclasses import replace

from unlearn_lab.commands.base import BaseCommand
from unlearn_lab.config.experiment import ForgetMode
from unlearn_lab.harness.runner import handle_forget_request
from unlearn_lab.model.config import BudgetMode, TrainBudget
from unlearn_lab.unlearn.request import Method


def parse_classes(text: str) -> list[int]:
    """Parse ``"0,3"`` into ``[0, 3]``.

    Raises:
        ValueError: If an entry is not an integer.
    """
    return [int(part) for part in text.split(",") if part.strip()]


class ForgetCommand(BaseCommand):
    """Forget one or more classes.

    Flags override the ``forget`` section of the experiment file:
    ``--iters`` switches the budget to that many fixed iterations.
    """

    def _budget(self) -> TrainBudget:
        budget = self.app.experiment.forget.budget
        iters = getattr(self.args, "iters", None)
        if iters is None:
            return budget
        if iters < 0:
            raise self.Error("--iters must be non-negative", exit_code=2)
        return replace(budget, mode=BudgetMode.FIXED_ITERATIONS, max_iterations=iters)

    def execute(self) -> int:
        config = self.app.experiment
        raw = getattr(self.args, "classes", None)
        try:
            classes = parse_classes(raw) if raw else list(config.forget.classes)
        except ValueError as e:
            raise self.Error(f"--classes must be comma-separated integers: {e}", 2) from e
        method = Method(getattr(self.args, "method", None) or config.forget.method)
        mode = ForgetMode(getattr(self.args, "mode", None) or config.forget.mode)
        seed = getattr(self.args, "seed", None)
        seed = config.seed if seed is None else seed
        store = self.app.store

        outcome = handle_forget_request(
            store,
            self.app.dataset,
            classes,
            mode,
            self._budget(),
            seed,
            method=method,
            generator=config.generator,
            scope=config.scope,
            dump_dir=store.root / "samples" if config.forget.dump_samples else None,
            retrain_learning_rate=config.forget.retrain_learning_rate,
        )
        if outcome.result is None or outcome.report is None:
            self.console.print(
                f"[yellow]Classes {list(outcome.classes)} are already forgotten; "
                "no unlearning was run[/yellow]"
            )
            return 0

        result = outcome.result
        self.console.print(
            f"[bold green]{method.label}[/bold green] ({mode.value}) forgot classes "
            f"{list(outcome.classes)}: {result.iterations_used} iteration(s), "
            f"{result.wall_time:.1f}s, model {result.model.short_digest}"
        )
        if outcome.deleted:
            self.console.print(f"Deleted {outcome.deleted} stored sample(s) of the forget classes")
        self.print_report(outcome.report, title="Unlearned model")
        return 0
