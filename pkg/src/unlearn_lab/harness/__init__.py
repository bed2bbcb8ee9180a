##############################################################################
#
# Name: __init__.py
#
# Function:
#       Experiment orchestration: original training, forget requests, sweeps
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from unlearn_lab.harness.runner import (
    ForgetOutcome,
    TrainOutcome,
    handle_forget_request,
    run_train,
)
from unlearn_lab.harness.sweep import (
    SweepCell,
    SweepOutcome,
    SweepRecord,
    read_records,
    run_sweep,
    table_from_records,
)

__all__ = [
    "ForgetOutcome",
    "SweepCell",
    "SweepOutcome",
    "SweepRecord",
    "TrainOutcome",
    "handle_forget_request",
    "read_records",
    "run_sweep",
    "run_train",
    "table_from_records",
]
