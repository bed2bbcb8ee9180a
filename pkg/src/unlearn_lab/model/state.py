##############################################################################
#
# Name: state.py
#
# Function:
#       Immutable ModelState (config + weights + digest + training log)
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

import hashlib
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Any

import torch
from torch import nn

from unlearn_lab.model.config import ModelConfig
from unlearn_lab.model.network import Classifier


@dataclass(frozen=True)
class EpochRecord:
    """One entry of a training log.

    ``epoch`` counts passes over the training data across the whole
    lineage of a model; ``iterations`` is the number of optimizer steps
    in this pass; ``class_counts[k]`` is how many samples labeled ``k``
    were presented to the optimizer.
    """

    epoch: int
    iterations: int
    loss: float
    val_acc: float | None
    class_counts: tuple[int, ...]

    @property
    def samples_seen(self) -> int:
        return sum(self.class_counts)

    def to_dict(self) -> dict[str, Any]:
        return {
            "epoch": self.epoch,
            "iterations": self.iterations,
            "loss": self.loss,
            "val_acc": self.val_acc,
            "class_counts": list(self.class_counts),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> EpochRecord:
        val_acc = data.get("val_acc")
        return cls(
            epoch=int(data["epoch"]),
            iterations=int(data["iterations"]),
            loss=float(data["loss"]),
            val_acc=float(val_acc) if val_acc is not None else None,
            class_counts=tuple(int(c) for c in data["class_counts"]),
        )


def weights_digest(weights: Mapping[str, torch.Tensor]) -> str:
    """Return the sha256 hex digest of a weight mapping.

    Names are visited in sorted order; each contributes its name, dtype,
    shape and raw little-endian bytes.
    """
    digest = hashlib.sha256()
    for name in sorted(weights):
        tensor = weights[name].detach().cpu().contiguous()
        digest.update(name.encode())
        digest.update(str(tensor.dtype).encode())
        digest.update(str(tuple(tensor.shape)).encode())
        digest.update(tensor.numpy().tobytes())
    return digest.hexdigest()


@dataclass(frozen=True, eq=False)
class ModelState:
    """A trained (or freshly initialized) classifier, never mutated in place.

    Every training or unlearning step returns a new ModelState; the weight
    tensors held here are private copies.
    """

    config: ModelConfig
    weights: Mapping[str, torch.Tensor]
    weight_digest: str
    train_log: tuple[EpochRecord, ...] = field(default=())

    @classmethod
    def from_module(
        cls,
        config: ModelConfig,
        module: nn.Module,
        train_log: tuple[EpochRecord, ...] = (),
    ) -> ModelState:
        """Snapshot a module's current weights into a new state."""
        weights = {k: v.detach().clone() for k, v in module.state_dict().items()}
        return cls.from_weights(config, weights, train_log)

    @classmethod
    def from_weights(
        cls,
        config: ModelConfig,
        weights: Mapping[str, torch.Tensor],
        train_log: tuple[EpochRecord, ...] = (),
    ) -> ModelState:
        """Wrap an already-copied weight mapping."""
        return cls(
            config=config,
            weights=MappingProxyType(dict(weights)),
            weight_digest=weights_digest(weights),
            train_log=tuple(train_log),
        )

    def instantiate(self, *, train: bool = False) -> Classifier:
        """Build a module carrying a copy of these weights."""
        module = Classifier(self.config)
        module.load_state_dict(dict(self.weights))
        module.train(train)
        return module

    def verify(self) -> bool:
        """Return True if the weights still hash to ``weight_digest``."""
        return weights_digest(self.weights) == self.weight_digest

    def with_log(self, records: tuple[EpochRecord, ...]) -> ModelState:
        """Return the same weights carrying a different training log."""
        return replace(self, train_log=tuple(records))

    @property
    def iterations_total(self) -> int:
        """Return the optimizer steps recorded across the whole log."""
        return sum(r.iterations for r in self.train_log)

    @property
    def short_digest(self) -> str:
        return self.weight_digest[:12]

    def class_exposure(self, since: int = 0) -> list[int]:
        """Per-class samples seen in log entries from position ``since`` on."""
        totals = [0] * self.config.num_classes
        for record in self.train_log[since:]:
            for k, count in enumerate(record.class_counts):
                totals[k] += count
        return totals
