##############################################################################
#
# Name: metrics.py
#
# Function:
#       MetricsReport and retain/forget accuracy on the train and test splits
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
import torch

from unlearn_lab.data.dataset import LabeledImageDataset, Split
from unlearn_lab.data.partition import ClassPartition
from unlearn_lab.data.subset import SubsetHandle
from unlearn_lab.errors import DomainError
from unlearn_lab.model.state import ModelState
from unlearn_lab.model.trainer import predict_probs

logger = logging.getLogger(__name__)

CELLS = ("acc_retain_train", "acc_forget_train", "acc_retain_test", "acc_forget_test")


class Scope(str, Enum):
    """Population the train-split cells are measured on."""

    FULL_SPLIT = "full_split"
    STORED_SUBSET = "stored_subset"


@dataclass(frozen=True)
class MetricsReport:
    """Retain/forget accuracy, in percent, on the train and test splits.

    A cell is ``None`` when its population is empty; ``n_eval`` maps every
    cell name to its sample count.
    """

    acc_retain_train: float | None
    acc_forget_train: float | None
    acc_retain_test: float | None
    acc_forget_test: float | None
    n_eval: Mapping[str, int] = field(default_factory=dict)
    model_digest: str = ""
    scope: Scope = Scope.FULL_SPLIT

    def __post_init__(self) -> None:
        for name, value in self.cells().items():
            if value is not None and not 0.0 <= value <= 100.0:
                raise DomainError(f"{name} must lie in [0, 100], got {value}")

    def cells(self) -> dict[str, float | None]:
        """Return the four accuracy cells by name."""
        return {name: getattr(self, name) for name in CELLS}

    def overall(self, split: Split | str) -> float | None:
        """Return the count-weighted accuracy over retain and forget cells of a split."""
        side = "train" if Split(split) is Split.TRAIN else "test"
        total = correct = 0.0
        for role in ("retain", "forget"):
            name = f"acc_{role}_{side}"
            value, n = getattr(self, name), self.n_eval.get(name, 0)
            if value is not None:
                total += n
                correct += n * value
        return correct / total if total else None

    def to_dict(self) -> dict[str, Any]:
        return {
            **self.cells(),
            "n_eval": dict(self.n_eval),
            "model_digest": self.model_digest,
            "scope": self.scope.value,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> MetricsReport:
        def cell(name: str) -> float | None:
            value = data.get(name)
            return float(value) if value is not None else None

        return cls(
            acc_retain_train=cell("acc_retain_train"),
            acc_forget_train=cell("acc_forget_train"),
            acc_retain_test=cell("acc_retain_test"),
            acc_forget_test=cell("acc_forget_test"),
            n_eval={k: int(v) for k, v in data.get("n_eval", {}).items()},
            model_digest=str(data.get("model_digest", "")),
            scope=Scope(data.get("scope", Scope.FULL_SPLIT.value)),
        )


def accuracy_cells(
    predictions: np.ndarray, labels: np.ndarray, forget_mask: np.ndarray
) -> tuple[float | None, float | None, int, int]:
    """Split top-1 accuracy into retain and forget parts.

    Returns:
        Tuple ``(acc_retain, acc_forget, n_retain, n_forget)``; an accuracy
        is ``None`` when its part is empty.
    """
    correct = predictions == labels
    n_forget = int(forget_mask.sum())
    n_retain = int(correct.size - n_forget)
    acc_forget = 100.0 * float(correct[forget_mask].sum()) / n_forget if n_forget else None
    acc_retain = 100.0 * float(correct[~forget_mask].sum()) / n_retain if n_retain else None
    return acc_retain, acc_forget, n_retain, n_forget


def _predict(model: ModelState, dataset: LabeledImageDataset, indices: np.ndarray) -> np.ndarray:
    view = dataset.view(indices)
    # argmax returns the first maximal index on ties
    return torch.argmax(predict_probs(model, view.images), dim=1).numpy()


def evaluate(
    model: ModelState,
    dataset: LabeledImageDataset,
    partition: ClassPartition,
    scope: Scope | str = Scope.FULL_SPLIT,
    *,
    subset: SubsetHandle | None = None,
) -> MetricsReport:
    """Measure retain and forget accuracy on the train and test splits.

    Args:
        model: Model to evaluate.
        dataset: Dataset with split tags.
        partition: Which classes are forget classes.
        scope: ``full_split`` measures the whole train split;
            ``stored_subset`` restricts the train cells to ``subset``.
        subset: The stored subset, required for ``stored_subset``.

    Returns:
        The report.

    Raises:
        DomainError: If model and dataset disagree on K or a stored-subset
            evaluation has no subset.
    """
    scope = Scope(scope)
    if model.config.num_classes != dataset.num_classes:
        raise DomainError(
            f"model predicts {model.config.num_classes} classes, dataset has {dataset.num_classes}"
        )
    if partition.num_classes != dataset.num_classes:
        raise DomainError("partition and dataset disagree on the class count")

    if scope is Scope.STORED_SUBSET:
        if subset is None:
            raise DomainError("stored_subset scope needs the stored subset")
        train_idx = np.asarray(subset.indices, dtype=np.int64)
    else:
        train_idx = dataset.split_indices(Split.TRAIN)
    test_idx = dataset.split_indices(Split.TEST)

    forget = np.array(sorted(partition.forget_classes), dtype=np.int64)
    labels = dataset.labels.numpy()
    values: dict[str, float | None] = {}
    n_eval: dict[str, int] = {}
    for side, idx in (("train", train_idx), ("test", test_idx)):
        truth = labels[idx]
        acc_r, acc_f, n_r, n_f = accuracy_cells(
            _predict(model, dataset, idx), truth, np.isin(truth, forget)
        )
        values[f"acc_retain_{side}"], values[f"acc_forget_{side}"] = acc_r, acc_f
        n_eval[f"acc_retain_{side}"], n_eval[f"acc_forget_{side}"] = n_r, n_f

    report = MetricsReport(
        acc_retain_train=values["acc_retain_train"],
        acc_forget_train=values["acc_forget_train"],
        acc_retain_test=values["acc_retain_test"],
        acc_forget_test=values["acc_forget_test"],
        n_eval=n_eval,
        model_digest=model.weight_digest,
        scope=scope,
    )
    logger.info("Evaluated %s (%s): %s", model.short_digest, scope.value, _brief(report))
    return report


def _brief(report: MetricsReport) -> str:
    return ", ".join(
        f"{name}={'n/a' if value is None else f'{value:.2f}'}"
        for name, value in report.cells().items()
    )
