##############################################################################
#
# Name: partition.py
#
# Function:
#       Retain/forget class partitions and random relabeling of forget data
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
import torch

from unlearn_lab.data.dataset import LabeledImageDataset
from unlearn_lab.data.subset import Role, SubsetHandle
from unlearn_lab.errors import DomainError, InvariantViolationError


@dataclass(frozen=True)
class ClassPartition:
    """Disjoint forget and retain class sets that cover 0..K-1."""

    forget_classes: frozenset[int]
    retain_classes: frozenset[int]

    def __post_init__(self) -> None:
        if not self.forget_classes:
            raise DomainError("forget class set is empty")
        if not self.retain_classes:
            raise DomainError("forget set covers every class; nothing would remain")
        if self.forget_classes & self.retain_classes:
            raise DomainError("forget and retain class sets overlap")
        union = self.forget_classes | self.retain_classes
        if union != frozenset(range(len(union))):
            raise DomainError("forget and retain classes must cover 0..K-1 exactly")

    @property
    def num_classes(self) -> int:
        """Return K."""
        return len(self.forget_classes) + len(self.retain_classes)

    def role_of(self, label: int) -> Role:
        """Return the role of a class under this partition."""
        return Role.FORGET if label in self.forget_classes else Role.RETAIN

    def forget_mask(self, labels: torch.Tensor) -> torch.Tensor:
        """Return a boolean mask of labels that belong to forget classes."""
        forget = torch.tensor(sorted(self.forget_classes), dtype=labels.dtype)
        return torch.isin(labels, forget)

    def split_handle(
        self, handle: SubsetHandle, labels: torch.Tensor
    ) -> tuple[SubsetHandle, SubsetHandle]:
        """Split a subset into its retain view and forget view.

        Args:
            handle: Subset to split.
            labels: Label tensor of the dataset the handle indexes.

        Returns:
            Tuple ``(retain_view, forget_view)``; disjoint and together
            equal to ``handle``.
        """
        idx = torch.as_tensor(handle.indices, dtype=torch.int64)
        in_forget = self.forget_mask(labels[idx])
        forget_idx = idx[in_forget].tolist()
        retain_idx = idx[~in_forget].tolist()
        return handle.restrict(retain_idx, Role.RETAIN), handle.restrict(forget_idx, Role.FORGET)

    def to_dict(self) -> dict[str, list[int]]:
        """Return the JSON-compatible form of the partition."""
        return {
            "forget_classes": sorted(self.forget_classes),
            "retain_classes": sorted(self.retain_classes),
        }


def partition_classes(
    dataset: LabeledImageDataset | int, forget: Iterable[int]
) -> ClassPartition:
    """Partition the classes of a dataset into forget and retain sets.

    Args:
        dataset: The dataset, or its class count K.
        forget: Class indices to forget.

    Returns:
        The partition with the complement as retain set.

    Raises:
        DomainError: If ``forget`` is empty, covers all classes, or holds
            indices outside 0..K-1.
    """
    num_classes = dataset if isinstance(dataset, int) else dataset.num_classes
    forget_set = frozenset(int(c) for c in forget)
    invalid = sorted(c for c in forget_set if not 0 <= c < num_classes)
    if invalid:
        raise DomainError(f"class indices {invalid} are outside 0..{num_classes - 1}")
    retain_set = frozenset(range(num_classes)) - forget_set
    return ClassPartition(forget_classes=forget_set, retain_classes=retain_set)


@dataclass(frozen=True)
class RelabeledBatch:
    """New labels assigned to forget samples; every label is a retain class."""

    indices: tuple[int, ...]
    new_labels: tuple[int, ...]
    seed: int

    def __len__(self) -> int:
        return len(self.indices)

    def check(self, partition: ClassPartition) -> None:
        """Verify no new label names a forget class.

        Raises:
            InvariantViolationError: On the first forget-class label found.
        """
        leaked = sorted(set(self.new_labels) & partition.forget_classes)
        if leaked:
            raise InvariantViolationError(f"relabeled batch carries forget classes {leaked}")


def draw_retain_labels(count: int, partition: ClassPartition, seed: int) -> np.ndarray:
    """Draw ``count`` labels i.i.d. uniformly from the retain classes."""
    retain = np.array(sorted(partition.retain_classes), dtype=np.int64)
    rng = np.random.default_rng(seed)
    return rng.choice(retain, size=count, replace=True)


def relabel_random(
    forget_subset: SubsetHandle,
    partition: ClassPartition,
    seed: int,
    labels: torch.Tensor,
) -> RelabeledBatch:
    """Give every forget sample a uniformly drawn retain-class label.

    Args:
        forget_subset: Subset holding only forget-class samples.
        partition: The class partition.
        seed: Seed for the label draws.
        labels: Label tensor of the dataset the subset indexes.

    Returns:
        The relabeled batch, in the subset's index order.

    Raises:
        DomainError: If the subset is not a forget subset or holds
            retain-class samples.
    """
    if forget_subset.role is not Role.FORGET:
        raise DomainError(f"expected a forget subset, got role '{forget_subset.role.value}'")
    idx = torch.as_tensor(forget_subset.indices, dtype=torch.int64)
    if idx.numel() and not bool(partition.forget_mask(labels[idx]).all()):
        raise DomainError("forget subset contains retain-class samples")

    new_labels = draw_retain_labels(len(forget_subset), partition, seed)
    batch = RelabeledBatch(
        indices=forget_subset.indices,
        new_labels=tuple(int(v) for v in new_labels),
        seed=seed,
    )
    batch.check(partition)
    return batch
