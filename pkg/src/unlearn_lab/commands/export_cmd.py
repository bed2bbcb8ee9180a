##############################################################################
#
# Name: export_cmd.py
#
# Function:
#       ExportFeaturesCommand: write penultimate-layer features to CSV
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
from unlearn_lab.data.dataset import Split
from unlearn_lab.data.partition import partition_classes
from unlearn_lab.evalkit.features import export_features


class ExportFeaturesCommand(BaseCommand):
    """Export features of one split for an external embedding tool."""

    def execute(self) -> int:
        config = self.app.experiment
        store = self.app.store
        model = store.checkpoint(getattr(self.args, "checkpoint", None))
        split = Split(getattr(self.args, "split", None) or Split.TEST.value)
        forget = store.forgotten_classes() or frozenset(config.forget.classes)
        partition = partition_classes(store.num_classes, forget)

        view = self.app.dataset.split_view(split)
        path = export_features(model, view, Path(self.args.path), partition)
        self.console.print(
            f"Wrote {len(view)} {split.value} feature row(s) of model "
            f"{model.short_digest} to {path}"
        )
        return 0
