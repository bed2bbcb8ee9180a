##############################################################################
#
# Name: toy.py
#
# Function:
#       Deterministic toy image archive for desk-scale runs and tests
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
from pathlib import Path

import numpy as np

from unlearn_lab.data.dataset import manifest_path_for

logger = logging.getLogger(__name__)


def make_toy_arrays(
    num_classes: int = 10,
    per_class: int = 200,
    size: int = 16,
    *,
    noise: float = 0.3,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Build a K-class grayscale image set in memory.

    Each class owns a fixed blocky stroke template; samples are the
    template, shifted by up to one pixel, with Gaussian pixel noise, so
    classes are learnable but not separable by a single pixel.

    Args:
        num_classes: Number of classes K.
        per_class: Samples per class.
        size: Image side length (must be a multiple of 4).
        noise: Standard deviation of the additive pixel noise.
        seed: Generator seed.

    Returns:
        Tuple ``(images, labels)``: uint8 images of shape (N, size, size)
        and int64 labels, ordered class by class.
    """
    if size % 4 or size < 4:
        raise ValueError(f"size must be a positive multiple of 4, got {size}")
    rng = np.random.default_rng(seed)
    cells = size // 4
    templates = []
    for _ in range(num_classes):
        grid = (rng.random((cells, cells)) < 0.4).astype(np.float32)
        templates.append(np.kron(grid, np.ones((4, 4), dtype=np.float32)))

    images = np.empty((num_classes * per_class, size, size), dtype=np.uint8)
    labels = np.repeat(np.arange(num_classes, dtype=np.int64), per_class)
    for i, label in enumerate(labels):
        shift = rng.integers(-1, 2, size=2)
        base = np.roll(templates[label], shift=(int(shift[0]), int(shift[1])), axis=(0, 1))
        sample = 0.15 + 0.7 * base + rng.normal(0.0, noise, size=base.shape)
        images[i] = np.clip(sample * 255.0, 0, 255).astype(np.uint8)
    return images, labels


def write_toy_archive(
    path: Path,
    num_classes: int = 10,
    per_class: int = 200,
    size: int = 16,
    *,
    noise: float = 0.3,
    seed: int = 0,
) -> Path:
    """Write a toy ``.npz`` archive plus its ``sample_id,label`` manifest.

    Returns:
        Path of the archive.
    """
    images, labels = make_toy_arrays(num_classes, per_class, size, noise=noise, seed=seed)
    path.parent.mkdir(parents=True, exist_ok=True)
    class_names = np.array([f"class_{k}" for k in range(num_classes)])
    with open(path, "wb") as f:
        np.savez_compressed(f, images=images, labels=labels, class_names=class_names)

    lines = ["sample_id,label"] + [f"{i},{int(label)}" for i, label in enumerate(labels)]
    manifest_path_for(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info("Wrote toy archive %s (%d samples)", path, len(labels))
    return path
