##############################################################################
#
# Name: __init__.py
#
# Function:
#       Retain/forget metrics, feature export and comparison tables
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from unlearn_lab.evalkit.features import export_features
from unlearn_lab.evalkit.metrics import MetricsReport, Scope, accuracy_cells, evaluate
from unlearn_lab.evalkit.table import ComparisonTable, Mark, compose_comparison_table

__all__ = [
    "ComparisonTable",
    "Mark",
    "MetricsReport",
    "Scope",
    "accuracy_cells",
    "compose_comparison_table",
    "evaluate",
    "export_features",
]
