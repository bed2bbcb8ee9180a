##############################################################################
#
# Name: eval_cmd.py
#
# Function:
#       EvalCommand: evaluate a stored checkpoint
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
from unlearn_lab.data.partition import partition_classes
from unlearn_lab.evalkit.metrics import Scope, evaluate


class EvalCommand(BaseCommand):
    """Evaluate a checkpoint (the current one by default).

    The forget side is the set of classes forgotten so far, or the
    configured forget classes when nothing has been forgotten yet.
    """

    def execute(self) -> int:
        config = self.app.experiment
        store = self.app.store
        digest = store.resolve_digest(getattr(self.args, "checkpoint", None))
        model = store.checkpoint(digest)
        scope = Scope(getattr(self.args, "scope", None) or config.scope)
        forget = store.forgotten_classes() or frozenset(config.forget.classes)
        partition = partition_classes(store.num_classes, forget)

        report = evaluate(
            model,
            self.app.dataset,
            partition,
            scope,
            subset=store.stored_subset() if scope is Scope.STORED_SUBSET else None,
        )
        classes = ", ".join(str(c) for c in sorted(forget))
        self.print_report(report, title=f"Model {digest[:12]} (forget classes: {classes})")
        return 0
