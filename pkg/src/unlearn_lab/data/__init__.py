##############################################################################
#
# Name: __init__.py
#
# Function:
#       Dataset loading, subsets and class partitions
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

# selection is not re-exported here; it depends on unlearn_lab.model,
# which in turn imports unlearn_lab.data.dataset.

from unlearn_lab.data.dataset import (
    DatasetSpec,
    LabeledImageDataset,
    SampleView,
    Split,
    load_dataset,
)
from unlearn_lab.data.partition import ClassPartition, partition_classes, relabel_random
from unlearn_lab.data.subset import Role, Strategy, SubsetHandle

__all__ = [
    "ClassPartition",
    "DatasetSpec",
    "LabeledImageDataset",
    "Role",
    "SampleView",
    "Split",
    "Strategy",
    "SubsetHandle",
    "load_dataset",
    "partition_classes",
    "relabel_random",
]
