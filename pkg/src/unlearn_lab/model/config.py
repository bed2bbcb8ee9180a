##############################################################################
#
# Name: config.py
#
# Function:
#       ModelConfig and TrainBudget value types with their presets
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Any

from unlearn_lab.errors import ConfigError

# Learning-rate defaults: full training vs. fine-tune style runs (FT, RL).
TRAIN_LEARNING_RATE = 1e-3
FINETUNE_LEARNING_RATE = 1e-4


class Backbone(str, Enum):
    """Feature extractor families."""

    SMALL_CONV = "small_conv"
    RESIDUAL_34_LIKE = "residual_34_like"


class InitScheme(str, Enum):
    """Weight initialization schemes."""

    KAIMING_LIKE = "kaiming_like"
    DEFAULT = "default"


class BudgetMode(str, Enum):
    """How a training run is bounded."""

    EPOCHS_WITH_EARLY_STOP = "epochs_with_early_stop"
    FIXED_ITERATIONS = "fixed_iterations"


@dataclass(frozen=True)
class ModelConfig:
    """Architecture of the classifier.

    ``input_geometry`` is (H, W, C). ``head_widths`` lists the widths of the
    fully connected head; the last entry is the class count K and the one
    before it is the feature width exposed by ``extract_features``.
    ``conv_channels`` sets one conv block per entry for the ``small_conv``
    backbone; an empty tuple flattens pixels straight into the head.
    """

    input_geometry: tuple[int, int, int]
    head_widths: tuple[int, ...]
    backbone: Backbone = Backbone.SMALL_CONV
    dropout_rate: float = 0.5
    init_scheme: InitScheme = InitScheme.KAIMING_LIKE
    conv_channels: tuple[int, ...] = (16, 32)
    pooled_size: int = 4

    def __post_init__(self) -> None:
        if len(self.input_geometry) != 3 or min(self.input_geometry) < 1:
            raise ConfigError(f"input_geometry must be (H, W, C), got {self.input_geometry}")
        if not self.head_widths or min(self.head_widths) < 1:
            raise ConfigError("head_widths must be a non-empty list of positive integers")
        if self.head_widths[-1] < 2:
            raise ConfigError("the last head width (class count) must be at least 2")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout_rate must lie in [0, 1), got {self.dropout_rate}")
        if any(c < 1 for c in self.conv_channels) or self.pooled_size < 1:
            raise ConfigError("conv_channels and pooled_size must be positive")

    @property
    def num_classes(self) -> int:
        """Return K, the width of the output layer."""
        return self.head_widths[-1]

    def check_classes(self, num_classes: int) -> None:
        """Raise ConfigError unless the head ends in ``num_classes``."""
        if self.num_classes != num_classes:
            raise ConfigError(
                f"head_widths ends in {self.num_classes} but the dataset has {num_classes} classes"
            )

    @classmethod
    def reference(cls, num_classes: int = 16) -> ModelConfig:
        """Full-size preset: residual backbone on 224x224 grayscale, 4-layer head."""
        return cls(
            input_geometry=(224, 224, 1),
            head_widths=(256, 128, 64, num_classes),
            backbone=Backbone.RESIDUAL_34_LIKE,
            dropout_rate=0.5,
            init_scheme=InitScheme.KAIMING_LIKE,
        )

    @classmethod
    def desk(cls, input_geometry: tuple[int, int, int], num_classes: int) -> ModelConfig:
        """Desk-scale preset: two conv blocks and the reference head widths."""
        return cls(
            input_geometry=input_geometry,
            head_widths=(256, 128, 64, num_classes),
            dropout_rate=0.25,
        )

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON-compatible form of the config."""
        out = asdict(self)
        out["backbone"] = self.backbone.value
        out["init_scheme"] = self.init_scheme.value
        out["input_geometry"] = list(self.input_geometry)
        out["head_widths"] = list(self.head_widths)
        out["conv_channels"] = list(self.conv_channels)
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ModelConfig:
        """Build a config from its JSON-compatible form."""
        try:
            return cls(
                input_geometry=tuple(data["input_geometry"]),  # type: ignore[arg-type]
                head_widths=tuple(data["head_widths"]),
                backbone=Backbone(data.get("backbone", Backbone.SMALL_CONV.value)),
                dropout_rate=float(data.get("dropout_rate", 0.5)),
                init_scheme=InitScheme(data.get("init_scheme", InitScheme.KAIMING_LIKE.value)),
                conv_channels=tuple(data.get("conv_channels", (16, 32))),
                pooled_size=int(data.get("pooled_size", 4)),
            )
        except (KeyError, ValueError, TypeError) as e:
            raise ConfigError(f"Invalid model config: {e}") from e


@dataclass(frozen=True)
class TrainBudget:
    """Bounds and optimizer settings for one training run.

    In ``fixed_iterations`` mode ``max_iterations`` optimizer steps are
    taken (patience is ignored). In ``epochs_with_early_stop`` mode training
    stops after ``max_epochs`` or when validation accuracy has not improved
    for ``patience`` epochs (0 disables early stopping).

    The optional stop condition ends a run early once the forget accuracy
    on the probe data is at most ``stop_forget_acc`` percent (and the
    retain accuracy at least ``stop_retain_acc`` percent when set); it is
    checked every ``check_every`` steps.
    """

    mode: BudgetMode = BudgetMode.FIXED_ITERATIONS
    max_epochs: int = 0
    max_iterations: int = 0
    patience: int = 0
    batch_size: int = 64
    learning_rate: float = TRAIN_LEARNING_RATE
    seed: int = 0
    stop_forget_acc: float | None = None
    stop_retain_acc: float | None = None
    check_every: int = 25

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ConfigError("batch_size must be positive")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.max_epochs < 0 or self.max_iterations < 0 or self.patience < 0:
            raise ConfigError("budget counts must be non-negative")
        if self.check_every < 1:
            raise ConfigError("check_every must be positive")
        if self.mode is BudgetMode.EPOCHS_WITH_EARLY_STOP and self.patience > self.max_epochs:
            raise ConfigError(
                f"patience ({self.patience}) may not exceed max_epochs ({self.max_epochs})"
            )

    @property
    def limit(self) -> int:
        """Return the budget ceiling in the unit of the mode."""
        if self.mode is BudgetMode.FIXED_ITERATIONS:
            return self.max_iterations
        return self.max_epochs

    @property
    def has_stop_condition(self) -> bool:
        """Return True if an early stop on forget/retain accuracy is configured."""
        return self.stop_forget_acc is not None or self.stop_retain_acc is not None

    def with_seed(self, seed: int) -> TrainBudget:
        """Return the same budget with a different seed."""
        return replace(self, seed=seed)

    @classmethod
    def iterations(
        cls, steps: int, *, learning_rate: float = FINETUNE_LEARNING_RATE, batch_size: int = 64,
        seed: int = 0,
    ) -> TrainBudget:
        """Return a fixed-iteration budget (the unlearning preset)."""
        return cls(
            mode=BudgetMode.FIXED_ITERATIONS,
            max_iterations=steps,
            learning_rate=learning_rate,
            batch_size=batch_size,
            seed=seed,
        )

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON-compatible form of the budget."""
        out = asdict(self)
        out["mode"] = self.mode.value
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TrainBudget:
        """Build a budget from its JSON-compatible form."""
        try:
            stop_f = data.get("stop_forget_acc")
            stop_r = data.get("stop_retain_acc")
            return cls(
                mode=BudgetMode(data.get("mode", BudgetMode.FIXED_ITERATIONS.value)),
                max_epochs=int(data.get("max_epochs", 0)),
                max_iterations=int(data.get("max_iterations", 0)),
                patience=int(data.get("patience", 0)),
                batch_size=int(data.get("batch_size", 64)),
                learning_rate=float(data.get("learning_rate", TRAIN_LEARNING_RATE)),
                seed=int(data.get("seed", 0)),
                stop_forget_acc=float(stop_f) if stop_f is not None else None,
                stop_retain_acc=float(stop_r) if stop_r is not None else None,
                check_every=int(data.get("check_every", 25)),
            )
        except (ValueError, TypeError) as e:
            raise ConfigError(f"Invalid training budget: {e}") from e
