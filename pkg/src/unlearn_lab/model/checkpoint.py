##############################################################################
#
# Name: checkpoint.py
#
# Function:
#       Versioned, digest-checked checkpoint files for models and projectors
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
import os
from pathlib import Path
from typing import Any

import torch

from unlearn_lab.errors import (
    CheckpointCorruptError,
    CheckpointError,
    ConfigError,
    UnsupportedVersionError,
)
from unlearn_lab.model.config import ModelConfig
from unlearn_lab.model.state import EpochRecord, ModelState, weights_digest

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def write_container(
    path: Path, *, role: str, header: dict[str, Any], tensors: dict[str, torch.Tensor]
) -> None:
    """Atomically write a checkpoint container.

    The file is a ``torch.save`` dict with ``format_version``, ``role``,
    a JSON-compatible ``header`` and a flat ``tensors`` mapping.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    blob = {
        "format_version": FORMAT_VERSION,
        "role": role,
        "header": header,
        "tensors": {k: v.detach().cpu().contiguous() for k, v in tensors.items()},
    }
    tmp = path.with_name(path.name + ".tmp")
    torch.save(blob, tmp)
    os.replace(tmp, path)


def read_container(
    path: Path, *, role: str
) -> tuple[dict[str, Any], dict[str, torch.Tensor]]:
    """Read a container written by :func:`write_container`.

    Returns:
        Tuple ``(header, tensors)``.

    Raises:
        CheckpointError: If the file is missing or holds another role.
        CheckpointCorruptError: If the file cannot be decoded.
        UnsupportedVersionError: If the format version is not ours.
    """
    if not path.is_file():
        raise CheckpointError(f"Checkpoint not found: {path}")
    try:
        blob = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as e:
        raise CheckpointCorruptError(f"Cannot decode checkpoint {path}: {e}") from e

    if not isinstance(blob, dict) or "format_version" not in blob:
        raise CheckpointCorruptError(f"{path} is not a checkpoint container")
    version = blob["format_version"]
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(int(version), FORMAT_VERSION)
    if blob.get("role") != role:
        raise CheckpointError(f"{path} holds a '{blob.get('role')}' checkpoint, expected '{role}'")
    header, tensors = blob.get("header"), blob.get("tensors")
    if not isinstance(header, dict) or not isinstance(tensors, dict):
        raise CheckpointCorruptError(f"{path} is missing its header or tensors")
    return header, tensors


def save_checkpoint(model: ModelState, path: Path) -> Path:
    """Write a model checkpoint (config, digest, training log, weights).

    Returns:
        ``path``.
    """
    header = {
        "config": model.config.to_dict(),
        "weight_digest": model.weight_digest,
        "train_log": [r.to_dict() for r in model.train_log],
    }
    write_container(path, role="classifier", header=header, tensors=dict(model.weights))
    logger.debug("Saved checkpoint %s (%s)", path, model.short_digest)
    return path


def load_checkpoint(path: Path) -> ModelState:
    """Read a model checkpoint and verify its weight digest.

    Raises:
        CheckpointCorruptError: On undecodable data or a digest mismatch.
        UnsupportedVersionError: On an unknown format version.
    """
    header, tensors = read_container(path, role="classifier")
    try:
        config = ModelConfig.from_dict(header["config"])
        log = tuple(EpochRecord.from_dict(r) for r in header["train_log"])
        recorded = str(header["weight_digest"])
    except (KeyError, TypeError, ValueError, ConfigError) as e:
        raise CheckpointCorruptError(f"{path}: malformed checkpoint header: {e}") from e

    actual = weights_digest(tensors)
    if actual != recorded:
        raise CheckpointCorruptError(
            f"{path}: weight digest {actual[:12]} does not match recorded {recorded[:12]}"
        )
    return ModelState.from_weights(config, tensors, log)
