##############################################################################
#
# Name: __init__.py
#
# Function:
#       Class-level machine unlearning lab: train, store a subset, forget
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

"""Train an image classifier, keep a confidence-ranked subset of its data,
and service class forget requests by retraining, fine-tuning or random
relabeling (with real, noise or generated forget samples)."""

from __future__ import annotations

from unlearn_lab.__version__ import __version__
from unlearn_lab.errors import (
    ConfigError,
    DomainError,
    StoreIntegrityError,
    TrainingDivergedError,
    UnlearnLabError,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "StoreIntegrityError",
    "TrainingDivergedError",
    "UnlearnLabError",
    "__version__",
]
