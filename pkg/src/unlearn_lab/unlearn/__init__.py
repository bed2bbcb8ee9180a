##############################################################################
#
# Name: __init__.py
#
# Function:
#       Class unlearning procedures: RT, FT and RL
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from unlearn_lab.unlearn.methods import (
    default_probe,
    run_unlearning,
    unlearn_finetune,
    unlearn_random_label,
    unlearn_retrain,
)
from unlearn_lab.unlearn.request import Method, UnlearnProbe, UnlearnRequest, UnlearnResult

__all__ = [
    "Method",
    "UnlearnProbe",
    "UnlearnRequest",
    "UnlearnResult",
    "default_probe",
    "run_unlearning",
    "unlearn_finetune",
    "unlearn_random_label",
    "unlearn_retrain",
]
