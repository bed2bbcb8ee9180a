##############################################################################
#
# Name: __init__.py
#
# Function:
#       Synthetic forget samples: generated from a frozen classifier or noise
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from unlearn_lab.forge.batch import Origin, SyntheticBatch, dump_samples, make_noise_batch
from unlearn_lab.forge.projector import (
    GeneratorConfig,
    ProjectorState,
    generate_samples,
    load_projector,
    save_projector,
    smoothed_targets,
    train_projector,
)

__all__ = [
    "GeneratorConfig",
    "Origin",
    "ProjectorState",
    "SyntheticBatch",
    "dump_samples",
    "generate_samples",
    "load_projector",
    "make_noise_batch",
    "save_projector",
    "smoothed_targets",
    "train_projector",
]
