##############################################################################
#
# Name: selection.py
#
# Function:
#       Per-class confidence ranking and strategy-based subset selection
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
import math
from dataclasses import dataclass

import numpy as np
import torch

from unlearn_lab.data.dataset import LabeledImageDataset, Split
from unlearn_lab.data.subset import Strategy, SubsetHandle
from unlearn_lab.errors import DomainError
from unlearn_lab.model.state import ModelState
from unlearn_lab.model.trainer import predict_probs

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConfidenceRanking:
    """Per-class sample indices ordered by descending confidence.

    ``order[k]`` lists the indices labeled ``k``; ``scores[k]`` holds the
    matching confidences (the probability the model gives the true class).
    Ties are broken by ascending index. Every class 0..K-1 has an entry,
    possibly empty.
    """

    order: dict[int, tuple[int, ...]]
    scores: dict[int, tuple[float, ...]]
    dataset_id: str = ""

    @property
    def num_classes(self) -> int:
        return len(self.order)

    def confidence_of(self) -> dict[int, float]:
        """Return a flat index -> confidence lookup."""
        return {
            i: s
            for k in self.order
            for i, s in zip(self.order[k], self.scores[k], strict=True)
        }


def rank_scores(
    indices: np.ndarray,
    labels: np.ndarray,
    scores: np.ndarray,
    num_classes: int,
    *,
    dataset_id: str = "",
) -> ConfidenceRanking:
    """Rank samples within each class by score, highest first.

    Args:
        indices: Dataset indices of the scored samples.
        labels: True label of each sample.
        scores: Confidence of each sample.
        num_classes: K.
        dataset_id: Id of the dataset the indices refer to.

    Returns:
        The ranking.
    """
    indices = np.asarray(indices, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    scores = np.asarray(scores, dtype=np.float64)
    order: dict[int, tuple[int, ...]] = {}
    ranked_scores: dict[int, tuple[float, ...]] = {}
    for k in range(num_classes):
        mask = labels == k
        idx, sc = indices[mask], scores[mask]
        # lexsort sorts by the last key first
        perm = np.lexsort((idx, -sc))
        order[k] = tuple(int(i) for i in idx[perm])
        ranked_scores[k] = tuple(float(s) for s in sc[perm])
    return ConfidenceRanking(order=order, scores=ranked_scores, dataset_id=dataset_id)


def rank_by_confidence(
    model: ModelState, dataset: LabeledImageDataset, split: Split | str
) -> ConfidenceRanking:
    """Rank every sample of a split by the model's confidence in its label.

    Raises:
        DomainError: If the model and dataset disagree on the class count.
    """
    if model.config.num_classes != dataset.num_classes:
        raise DomainError(
            f"model predicts {model.config.num_classes} classes, dataset has {dataset.num_classes}"
        )
    idx = dataset.split_indices(split)
    view = dataset.view(idx)
    probs = predict_probs(model, view.images)
    confidence = probs[torch.arange(len(view)), view.labels]
    return rank_scores(
        idx,
        view.labels.numpy(),
        confidence.numpy(),
        dataset.num_classes,
        dataset_id=dataset.dataset_id,
    )


def class_quota(fraction: float, count: int) -> int:
    """Number of samples a strategy takes from a class of ``count`` samples."""
    if fraction >= 1.0:
        return count
    return min(count, max(1, math.floor(fraction * count + 1e-9)))


def select_subset(
    ranking: ConfidenceRanking,
    strategy: Strategy | str,
    fraction: float,
    seed: int = 0,
) -> SubsetHandle:
    """Pick a subset of every class according to ``strategy``.

    Each class contributes ``max(1, floor(fraction * n_k))`` samples (all
    of them at ``fraction`` 1.0): the most confident for ``top``, the
    least confident for ``bottom``, a seeded uniform draw for ``random``.
    ``mix`` takes ``max(1, floor(fraction * n_k / 2))`` from each end and
    keeps an index once when the two ends overlap. ``full`` takes
    everything.

    Args:
        ranking: Per-class confidence ranking.
        strategy: Selection strategy.
        fraction: Share of each class to keep, in (0, 1].
        seed: Seed for the ``random`` strategy.

    Returns:
        The selected subset.

    Raises:
        DomainError: If ``fraction`` is outside (0, 1] or a class has no
            samples to select from.
    """
    strategy = Strategy(strategy)
    if not 0.0 < fraction <= 1.0:
        raise DomainError(f"fraction must lie in (0, 1], got {fraction}")

    rng = np.random.default_rng(seed)
    chosen: list[int] = []
    for k in sorted(ranking.order):
        members = ranking.order[k]
        n = len(members)
        if n == 0:
            raise DomainError(f"class {k} has no samples to select from")
        if strategy is Strategy.FULL:
            chosen.extend(members)
            continue
        quota = class_quota(fraction, n)
        if strategy is Strategy.TOP:
            picked = members[:quota]
        elif strategy is Strategy.BOTTOM:
            picked = members[n - quota :]
        elif strategy is Strategy.MIX:
            half = n if fraction >= 1.0 else min(n, max(1, math.floor(fraction * n / 2 + 1e-9)))
            picked = members[:half] + members[n - half :]
        else:
            draw = rng.choice(np.asarray(members), size=quota, replace=False)
            picked = tuple(int(i) for i in draw)
        chosen.extend(picked)

    handle = SubsetHandle(
        source_dataset_id=ranking.dataset_id,
        indices=tuple(sorted(set(chosen))),
        strategy=strategy,
        fraction=fraction,
        seed=seed,
    )
    logger.info(
        "Selected %d sample(s): strategy %s, fraction %s", len(handle), strategy.value, fraction
    )
    return handle
