##############################################################################
#
# Name: batch.py
#
# Function:
#       SyntheticBatch, the random-noise baseline, and PNG sample dumps
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
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from unlearn_lab.data.dataset import SampleView
from unlearn_lab.errors import DomainError, ExportError, ShapeError

logger = logging.getLogger(__name__)


class Origin(str, Enum):
    """Where synthetic samples came from."""

    GENERATED = "generated"
    NOISE = "noise"


@dataclass(frozen=True, eq=False)
class SyntheticBatch:
    """Stand-in forget samples.

    ``images`` has shape (N, C, H, W) with values in [0, 1];
    ``source_class`` holds the class each image stands in for.
    Generated batches record the digest of the classifier their projector
    was trained against.
    """

    images: torch.Tensor
    source_class: torch.Tensor
    origin: Origin
    seed: int
    frozen_model_digest: str | None = None

    def __post_init__(self) -> None:
        if self.images.ndim != 4:
            raise ShapeError(
                f"synthetic images must be (N, C, H, W), got {tuple(self.images.shape)}"
            )
        if self.source_class.shape != (self.images.shape[0],):
            raise ShapeError("one source class is needed per synthetic image")
        if self.origin is Origin.GENERATED and not self.frozen_model_digest:
            raise DomainError("generated batches must record the frozen model digest")

    def __len__(self) -> int:
        return int(self.images.shape[0])

    @property
    def geometry(self) -> tuple[int, int, int]:
        """Return (H, W, C)."""
        _, c, h, w = self.images.shape
        return (int(h), int(w), int(c))

    def as_view(self, labels: torch.Tensor | None = None) -> SampleView:
        """Return a SampleView with negative ids and the given (or source) labels."""
        ids = -torch.arange(1, len(self) + 1, dtype=torch.int64)
        return SampleView(ids, self.images, self.source_class if labels is None else labels)

    @classmethod
    def concat(cls, batches: Sequence[SyntheticBatch], *, seed: int) -> SyntheticBatch:
        """Join batches of one origin (e.g. one per forget class)."""
        if not batches:
            raise DomainError("nothing to concatenate")
        origins = {b.origin for b in batches}
        digests = {b.frozen_model_digest for b in batches}
        if len(origins) != 1 or len(digests) != 1:
            raise DomainError("cannot mix origins or frozen models in one batch")
        return cls(
            images=torch.cat([b.images for b in batches]),
            source_class=torch.cat([b.source_class for b in batches]),
            origin=batches[0].origin,
            seed=seed,
            frozen_model_digest=batches[0].frozen_model_digest,
        )


def make_noise_batch(
    geometry: tuple[int, int, int], cls: int, count: int, seed: int
) -> SyntheticBatch:
    """Return ``count`` images of i.i.d. uniform [0, 1) pixels.

    Args:
        geometry: (H, W, C) of the images.
        cls: Class the batch stands in for.
        count: Number of images.
        seed: Generator seed.

    Raises:
        DomainError: If ``count`` is negative or the geometry is invalid.
    """
    if count < 0:
        raise DomainError(f"count must be non-negative, got {count}")
    if len(geometry) != 3 or min(geometry) < 1:
        raise DomainError(f"geometry must be (H, W, C) with positive sides, got {geometry}")
    height, width, channels = geometry
    generator = torch.Generator().manual_seed(seed)
    images = torch.rand((count, channels, height, width), generator=generator)
    return SyntheticBatch(
        images=images,
        source_class=torch.full((count,), cls, dtype=torch.int64),
        origin=Origin.NOISE,
        seed=seed,
    )


def dump_samples(batch: SyntheticBatch, directory: Path) -> list[Path]:
    """Write every image as a PNG named ``{class}_{seed}_{idx}.png``.

    Returns:
        The written paths, in batch order.

    Raises:
        ExportError: If a file cannot be written.
    """
    directory.mkdir(parents=True, exist_ok=True)
    pixels = (batch.images.clamp(0.0, 1.0) * 255.0).round().to(torch.uint8)
    pixels = pixels.permute(0, 2, 3, 1).numpy()
    paths: list[Path] = []
    for idx, (array, cls) in enumerate(zip(pixels, batch.source_class.tolist(), strict=True)):
        path = directory / f"{cls}_{batch.seed}_{idx}.png"
        plane = array[:, :, 0] if array.shape[2] == 1 else array
        image = Image.fromarray(np.ascontiguousarray(plane))
        try:
            image.save(path, format="PNG")
        except OSError as e:
            raise ExportError(f"Cannot write sample {path}: {e}") from e
        paths.append(path)
    logger.info("Dumped %d %s sample(s) to %s", len(paths), batch.origin.value, directory)
    return paths
