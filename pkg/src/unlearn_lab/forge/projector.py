##############################################################################
#
# Name: projector.py
#
# Function:
#       Label-guided sample generator: a two-layer projector trained against
#       a frozen classifier with label-smoothed cross-entropy
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
from collections.abc import Iterable, Mapping
from dataclasses import asdict, dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any

import torch
import torch.nn.functional as F
from torch import nn

from unlearn_lab.errors import (
    CheckpointCorruptError,
    ConfigError,
    ContractViolationError,
    DomainError,
    TrainingDivergedError,
)
from unlearn_lab.forge.batch import Origin, SyntheticBatch
from unlearn_lab.model.checkpoint import read_container, write_container
from unlearn_lab.model.state import ModelState, weights_digest

logger = logging.getLogger(__name__)

PROBE_SEED_OFFSET = 7919


@dataclass(frozen=True)
class GeneratorConfig:
    """Projector size and optimization settings.

    ``hidden_width`` defaults to four times ``noise_dim``.
    """

    noise_dim: int = 64
    hidden_width: int | None = None
    smoothing_eps: float = 0.1
    steps: int = 500
    learning_rate: float = 1e-3
    batch: int = 64
    seed: int = 0
    probe_size: int = 64

    def __post_init__(self) -> None:
        if self.noise_dim < 1 or (self.hidden_width is not None and self.hidden_width < 1):
            raise ConfigError("noise_dim and hidden_width must be positive")
        if not 0.0 < self.smoothing_eps < 1.0:
            raise ConfigError(f"smoothing_eps must lie in (0, 1), got {self.smoothing_eps}")
        if self.steps < 1 or self.batch < 1 or self.probe_size < 1:
            raise ConfigError("steps, batch and probe_size must be positive")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")

    @property
    def hidden(self) -> int:
        return self.hidden_width if self.hidden_width is not None else 4 * self.noise_dim

    def check_eps(self, num_classes: int) -> None:
        """Raise ConfigError unless the smoothed target keeps its argmax."""
        if self.smoothing_eps >= (num_classes - 1) / num_classes:
            raise ConfigError(
                f"smoothing_eps {self.smoothing_eps} must be below (K-1)/K for K={num_classes}"
            )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> GeneratorConfig:
        try:
            return cls(**dict(data))
        except TypeError as e:
            raise ConfigError(f"Invalid generator config: {e}") from e


class Projector(nn.Module):
    """one-hot(c) ++ z -> Linear -> ReLU -> Linear -> sigmoid -> (C, H, W)."""

    def __init__(
        self, num_classes: int, noise_dim: int, hidden: int, geometry: tuple[int, int, int]
    ) -> None:
        super().__init__()
        self.num_classes = num_classes
        self.noise_dim = noise_dim
        self.geometry = geometry
        height, width, channels = geometry
        self.fc1 = nn.Linear(num_classes + noise_dim, hidden)
        self.fc2 = nn.Linear(hidden, height * width * channels)

    def forward(self, classes: torch.Tensor, z: torch.Tensor) -> torch.Tensor:
        onehot = F.one_hot(classes, self.num_classes).to(z.dtype)
        out = torch.sigmoid(self.fc2(torch.relu(self.fc1(torch.cat([onehot, z], dim=1)))))
        height, width, channels = self.geometry
        return out.view(-1, channels, height, width)


def smoothed_targets(
    classes: torch.Tensor, num_classes: int, eps: float, dtype: torch.dtype = torch.float32
) -> torch.Tensor:
    """Label-smoothed one-hot rows: 1-eps on the class, eps/(K-1) elsewhere."""
    targets = torch.full((classes.shape[0], num_classes), eps / (num_classes - 1), dtype=dtype)
    targets[torch.arange(classes.shape[0]), classes] = 1.0 - eps
    return targets


def projector_loss(
    projector: nn.Module,
    classifier: nn.Module,
    classes: torch.Tensor,
    z: torch.Tensor,
    eps: float,
) -> torch.Tensor:
    """Soft-target cross-entropy of the classifier on projected images."""
    logits = classifier(projector(classes, z))
    targets = smoothed_targets(classes, logits.shape[1], eps, dtype=logits.dtype)
    return -(targets * F.log_softmax(logits, dim=1)).sum(dim=1).mean()


@dataclass(frozen=True, eq=False)
class ProjectorState:
    """Trained projector weights and what they were trained against."""

    config: GeneratorConfig
    num_classes: int
    geometry: tuple[int, int, int]
    target_classes: tuple[int, ...]
    weights: Mapping[str, torch.Tensor]
    frozen_model_digest: str
    loss_before: float = math.nan
    loss_after: float = math.nan
    weight_digest: str = field(default="")

    def __post_init__(self) -> None:
        if not self.weight_digest:
            object.__setattr__(self, "weight_digest", weights_digest(self.weights))

    def instantiate(self) -> Projector:
        module = Projector(
            self.num_classes, self.config.noise_dim, self.config.hidden, self.geometry
        )
        module.load_state_dict(dict(self.weights))
        module.eval()
        return module


def _draw(
    targets: torch.Tensor, count: int, noise_dim: int, generator: torch.Generator
) -> tuple[torch.Tensor, torch.Tensor]:
    pick = torch.randint(len(targets), (count,), generator=generator)
    return targets[pick], torch.randn((count, noise_dim), generator=generator)


def train_projector(
    frozen: ModelState, target_classes: Iterable[int], config: GeneratorConfig
) -> ProjectorState:
    """Fit a projector so the frozen classifier labels its output as the target class.

    Each step draws classes uniformly from ``target_classes`` and a fresh
    standard-normal z. Only projector weights are optimized; the
    classifier runs in eval mode with gradients disabled on its weights.

    Args:
        frozen: Classifier to generate against; never modified.
        target_classes: Classes the projector learns (typically the forget
            classes).
        config: Projector settings.

    Returns:
        The trained projector, with the probe loss before and after.

    Raises:
        DomainError: If ``target_classes`` is empty or out of range.
        ConfigError: If ``smoothing_eps`` is too large for K.
        TrainingDivergedError: If the loss becomes non-finite.
        ContractViolationError: If the frozen classifier's weights changed.
    """
    num_classes = frozen.config.num_classes
    targets_list = sorted({int(c) for c in target_classes})
    if not targets_list:
        raise DomainError("target_classes is empty")
    if targets_list[0] < 0 or targets_list[-1] >= num_classes:
        raise DomainError(f"target classes {targets_list} are outside 0..{num_classes - 1}")
    config.check_eps(num_classes)

    classifier = frozen.instantiate()
    classifier.requires_grad_(False)
    targets = torch.tensor(targets_list, dtype=torch.int64)
    geometry = frozen.config.input_geometry

    probe_gen = torch.Generator().manual_seed(config.seed + PROBE_SEED_OFFSET)
    probe_classes, probe_z = _draw(targets, config.probe_size, config.noise_dim, probe_gen)

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(config.seed)
        projector = Projector(num_classes, config.noise_dim, config.hidden, geometry)
    optimizer = torch.optim.Adam(projector.parameters(), lr=config.learning_rate)
    generator = torch.Generator().manual_seed(config.seed)

    def probe_loss() -> float:
        with torch.no_grad():
            eps = config.smoothing_eps
            return float(projector_loss(projector, classifier, probe_classes, probe_z, eps))

    loss_before = probe_loss()
    for step in range(config.steps):
        classes, z = _draw(targets, config.batch, config.noise_dim, generator)
        loss = projector_loss(projector, classifier, classes, z, config.smoothing_eps)
        if not torch.isfinite(loss):
            raise TrainingDivergedError(
                f"projector loss became non-finite at step {step + 1}", frozen
            )
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
    loss_after = probe_loss()

    if weights_digest(classifier.state_dict()) != frozen.weight_digest or not frozen.verify():
        raise ContractViolationError("frozen classifier weights changed during projector training")
    if not loss_after < loss_before:
        logger.warning(
            "Projector probe loss did not improve: %.4f -> %.4f", loss_before, loss_after
        )
    logger.info(
        "Trained projector for classes %s: probe loss %.4f -> %.4f",
        targets_list,
        loss_before,
        loss_after,
    )
    return ProjectorState(
        config=config,
        num_classes=num_classes,
        geometry=geometry,
        target_classes=tuple(targets_list),
        weights=MappingProxyType(
            {k: v.detach().clone() for k, v in projector.state_dict().items()}
        ),
        frozen_model_digest=frozen.weight_digest,
        loss_before=loss_before,
        loss_after=loss_after,
    )


def generate_samples(projector: ProjectorState, cls: int, count: int, seed: int) -> SyntheticBatch:
    """Generate ``count`` images of class ``cls``; deterministic per seed.

    Raises:
        DomainError: If the projector was not trained for ``cls`` or
            ``count`` is negative.
    """
    if cls not in projector.target_classes:
        raise DomainError(
            f"projector was trained for classes {list(projector.target_classes)}, not {cls}"
        )
    if count < 0:
        raise DomainError(f"count must be non-negative, got {count}")
    module = projector.instantiate()
    generator = torch.Generator().manual_seed(seed)
    classes = torch.full((count,), cls, dtype=torch.int64)
    z = torch.randn((count, projector.config.noise_dim), generator=generator)
    with torch.no_grad():
        images = module(classes, z).clamp(0.0, 1.0)
    return SyntheticBatch(
        images=images,
        source_class=classes,
        origin=Origin.GENERATED,
        seed=seed,
        frozen_model_digest=projector.frozen_model_digest,
    )


def save_projector(projector: ProjectorState, path: Path) -> Path:
    """Write a projector checkpoint (role ``projector``)."""
    header = {
        "config": projector.config.to_dict(),
        "num_classes": projector.num_classes,
        "geometry": list(projector.geometry),
        "target_classes": list(projector.target_classes),
        "frozen_model_digest": projector.frozen_model_digest,
        "weight_digest": projector.weight_digest,
        "loss_before": projector.loss_before,
        "loss_after": projector.loss_after,
    }
    write_container(path, role="projector", header=header, tensors=dict(projector.weights))
    return path


def load_projector(path: Path) -> ProjectorState:
    """Read a projector checkpoint and verify its weight digest.

    Raises:
        CheckpointCorruptError: On a malformed header or digest mismatch.
    """
    header, tensors = read_container(path, role="projector")
    try:
        state = ProjectorState(
            config=GeneratorConfig.from_dict(header["config"]),
            num_classes=int(header["num_classes"]),
            geometry=tuple(header["geometry"]),  # type: ignore[arg-type]
            target_classes=tuple(int(c) for c in header["target_classes"]),
            weights=MappingProxyType(dict(tensors)),
            frozen_model_digest=str(header["frozen_model_digest"]),
            loss_before=float(header["loss_before"]),
            loss_after=float(header["loss_after"]),
        )
        recorded = str(header["weight_digest"])
    except (KeyError, TypeError, ValueError, ConfigError) as e:
        raise CheckpointCorruptError(f"{path}: malformed projector header: {e}") from e
    if state.weight_digest != recorded:
        raise CheckpointCorruptError(f"{path}: projector weight digest does not verify")
    return state
