##############################################################################
#
# Name: __init__.py
#
# Function:
#       Classifier construction, training, inference and checkpoints
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from unlearn_lab.model.checkpoint import load_checkpoint, save_checkpoint
from unlearn_lab.model.config import Backbone, BudgetMode, InitScheme, ModelConfig, TrainBudget
from unlearn_lab.model.state import EpochRecord, ModelState
from unlearn_lab.model.trainer import build_model, extract_features, predict_probs, train

__all__ = [
    "Backbone",
    "BudgetMode",
    "EpochRecord",
    "InitScheme",
    "ModelConfig",
    "ModelState",
    "TrainBudget",
    "build_model",
    "extract_features",
    "load_checkpoint",
    "predict_probs",
    "save_checkpoint",
    "train",
]
