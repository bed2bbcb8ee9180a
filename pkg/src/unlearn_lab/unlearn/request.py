##############################################################################
#
# Name: request.py
#
# Function:
#       UnlearnRequest and UnlearnResult value types
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any

from unlearn_lab.data.dataset import SampleView
from unlearn_lab.data.partition import ClassPartition
from unlearn_lab.data.subset import SubsetHandle
from unlearn_lab.errors import DomainError
from unlearn_lab.forge.batch import SyntheticBatch
from unlearn_lab.model.config import ModelConfig, TrainBudget
from unlearn_lab.model.state import ModelState


class Method(str, Enum):
    """Unlearning procedures."""

    RT = "rt"
    FT = "ft"
    RL = "rl"

    @property
    def label(self) -> str:
        return self.value.upper()


ForgetData = SubsetHandle | SyntheticBatch | None


@dataclass(frozen=True, eq=False)
class UnlearnRequest:
    """One unlearning job.

    RT and FT train on ``retain_data`` only and take no forget data; RL
    needs forget data, either a real forget subset or a synthetic batch.
    ``model_config`` sets the architecture RT rebuilds; it falls back to
    the parent's config.
    """

    method: Method
    partition: ClassPartition
    retain_data: SubsetHandle
    forget_data: ForgetData
    budget: TrainBudget
    seed: int
    model_config: ModelConfig | None = None

    def __post_init__(self) -> None:
        if self.method in (Method.RT, Method.FT) and self.forget_data is not None:
            raise DomainError(f"{self.method.label} uses the retain set only; drop forget_data")
        if self.method is Method.RL and self.forget_data is None:
            raise DomainError("RL needs forget data (a real subset or a synthetic batch)")

    @property
    def forget_kind(self) -> str:
        """Return ``none``, ``real`` or the synthetic batch origin."""
        if self.forget_data is None:
            return "none"
        if isinstance(self.forget_data, SubsetHandle):
            return "real"
        return self.forget_data.origin.value

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-compatible description (forget data by kind and size)."""
        return {
            "method": self.method.value,
            "partition": self.partition.to_dict(),
            "retain_size": len(self.retain_data),
            "forget_kind": self.forget_kind,
            "forget_size": 0 if self.forget_data is None else len(self.forget_data),
            "budget": self.budget.to_dict(),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class UnlearnProbe:
    """Samples the optional stop condition measures accuracy on."""

    forget: SampleView
    retain: SampleView | None = None


@dataclass(frozen=True, eq=False)
class UnlearnResult:
    """The unlearned model plus how it was obtained."""

    model: ModelState
    method: Method
    iterations_used: int
    wall_time: float
    parent_digest: str | None
    request: UnlearnRequest

    def summary(self) -> dict[str, Any]:
        """Return ``{method, iterations, wall_time, parent_digest, result_digest}``."""
        return {
            "method": self.method.value,
            "iterations": self.iterations_used,
            "wall_time": round(self.wall_time, 3),
            "parent_digest": self.parent_digest,
            "result_digest": self.model.weight_digest,
        }
