##############################################################################
#
# Name: dataset.py
#
# Function:
#       LabeledImageDataset, tensor-backed sample views, and dataset loading
#       from per-class image folders or packaged .npz archives
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
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image

from unlearn_lab.errors import ConfigError, DataLoadError, DomainError, ShapeError

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".gif")

DEFAULT_SPLIT_RATIOS = {"train": 0.8, "val": 0.1, "test": 0.1}


class Split(str, Enum):
    """Named dataset splits."""

    TRAIN = "train"
    VAL = "val"
    TEST = "test"


@dataclass(frozen=True)
class DatasetSpec:
    """Description of where a dataset lives and how to split it.

    Exactly one of ``split_ratios`` / ``split_files`` is used; when both are
    absent the 80/10/10 default ratios apply.
    """

    source_path: Path
    channels: int = 1
    image_size: tuple[int, int] | None = None
    split_ratios: dict[str, float] | None = None
    split_files: dict[str, Path] | None = None
    seed: int = 0
    class_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.channels not in (1, 3):
            raise ConfigError(f"channels must be 1 or 3, got {self.channels}")
        if self.split_ratios is not None and self.split_files is not None:
            raise ConfigError("Give either split_ratios or split_files, not both")
        if self.split_ratios is not None:
            if set(self.split_ratios) != {s.value for s in Split}:
                raise ConfigError("split_ratios needs exactly the keys train, val, test")
            total = sum(self.split_ratios.values())
            if any(r < 0 for r in self.split_ratios.values()) or not math.isclose(
                total, 1.0, abs_tol=1e-6
            ):
                raise ConfigError(f"split_ratios must be non-negative and sum to 1, got {total}")
        if self.split_files is not None and set(self.split_files) != {s.value for s in Split}:
            raise ConfigError("split_files needs exactly the keys train, val, test")

    @classmethod
    def from_dict(cls, data: dict[str, Any], *, base_dir: Path | None = None) -> DatasetSpec:
        """Build a spec from a (schema-validated) configuration tree.

        Args:
            data: The ``dataset`` section of an experiment file.
            base_dir: Directory that relative paths are resolved against.

        Returns:
            The dataset spec.
        """
        base = base_dir or Path.cwd()

        def resolve(value: str) -> Path:
            path = Path(value).expanduser()
            return path if path.is_absolute() else base / path

        image_size = data.get("image_size")
        split_files = data.get("split_files")
        class_names = data.get("class_names")
        return cls(
            source_path=resolve(data["source_path"]),
            channels=int(data.get("channels", 1)),
            image_size=tuple(image_size) if image_size else None,  # type: ignore[arg-type]
            split_ratios=dict(data["split_ratios"]) if "split_ratios" in data else None,
            split_files=(
                {k: resolve(v) for k, v in split_files.items()} if split_files else None
            ),
            seed=int(data.get("seed", 0)),
            class_names=tuple(class_names) if class_names else None,
        )

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON-compatible form of this spec."""
        out: dict[str, Any] = {
            "source_path": str(self.source_path),
            "channels": self.channels,
            "seed": self.seed,
        }
        if self.image_size is not None:
            out["image_size"] = list(self.image_size)
        if self.split_ratios is not None:
            out["split_ratios"] = dict(self.split_ratios)
        if self.split_files is not None:
            out["split_files"] = {k: str(v) for k, v in self.split_files.items()}
        if self.class_names is not None:
            out["class_names"] = list(self.class_names)
        return out


@dataclass(frozen=True, eq=False)
class SampleView:
    """A batch of samples with their dataset indices.

    ``ids`` are indices into the source dataset; synthetic samples use
    negative ids so they can never collide with real ones.
    """

    ids: torch.Tensor
    images: torch.Tensor
    labels: torch.Tensor

    def __post_init__(self) -> None:
        n = self.ids.shape[0]
        if self.images.shape[0] != n or self.labels.shape[0] != n:
            raise ShapeError(
                f"view parts disagree in length: ids={n}, images={self.images.shape[0]}, "
                f"labels={self.labels.shape[0]}"
            )

    def __len__(self) -> int:
        return int(self.ids.shape[0])

    def with_labels(self, labels: torch.Tensor) -> SampleView:
        """Return the same samples carrying different labels."""
        return SampleView(self.ids, self.images, labels.to(torch.int64))

    def concat(self, other: SampleView) -> SampleView:
        """Return this view followed by ``other``."""
        if len(self) and len(other) and self.images.shape[1:] != other.images.shape[1:]:
            raise ShapeError(
                f"cannot join views of geometry {tuple(self.images.shape[1:])} "
                f"and {tuple(other.images.shape[1:])}"
            )
        return SampleView(
            torch.cat([self.ids, other.ids]),
            torch.cat([self.images, other.images]),
            torch.cat([self.labels, other.labels]),
        )


@dataclass(frozen=True, eq=False)
class LabeledImageDataset:
    """Images, integer labels and split tags held in memory.

    ``images`` is a float32 tensor of shape (N, C, H, W) with values in
    [0, 1]; ``labels`` is int64 of shape (N,); ``split_tags`` holds one
    :class:`Split` value string per sample.
    """

    images: torch.Tensor
    labels: torch.Tensor
    split_tags: np.ndarray
    num_classes: int
    class_names: tuple[str, ...] = ()
    dataset_id: str = field(default="")

    def __post_init__(self) -> None:
        n = self.images.shape[0]
        if self.images.ndim != 4:
            raise ShapeError(f"images must be (N, C, H, W), got {tuple(self.images.shape)}")
        if self.labels.shape != (n,) or self.split_tags.shape != (n,):
            raise ShapeError("images, labels and split tags must have equal length")
        if n and (int(self.labels.min()) < 0 or int(self.labels.max()) >= self.num_classes):
            raise DomainError(f"labels must lie in 0..{self.num_classes - 1}")
        valid = {s.value for s in Split}
        if not set(np.unique(self.split_tags).tolist()) <= valid:
            raise DomainError("every sample needs exactly one of the train/val/test tags")
        if not self.dataset_id:
            object.__setattr__(self, "dataset_id", self._content_digest())

    def __len__(self) -> int:
        return int(self.images.shape[0])

    @property
    def geometry(self) -> tuple[int, int, int]:
        """Return (H, W, C) of every image."""
        _, c, h, w = self.images.shape
        return (int(h), int(w), int(c))

    @cached_property
    def _split_index(self) -> dict[str, np.ndarray]:
        return {s.value: np.flatnonzero(self.split_tags == s.value) for s in Split}

    def split_indices(self, split: Split | str) -> np.ndarray:
        """Return the ascending sample indices tagged with ``split``."""
        return self._split_index[Split(split).value]

    def view(self, indices: np.ndarray | list[int] | torch.Tensor) -> SampleView:
        """Return a tensor view of the given sample indices.

        Raises:
            DomainError: If any index is out of range.
        """
        idx = torch.as_tensor(np.asarray(indices, dtype=np.int64))
        if idx.numel() and (int(idx.min()) < 0 or int(idx.max()) >= len(self)):
            raise DomainError(f"sample index out of range for dataset of size {len(self)}")
        return SampleView(idx, self.images[idx], self.labels[idx])

    def split_view(self, split: Split | str) -> SampleView:
        """Return a view over every sample of one split."""
        return self.view(self.split_indices(split))

    def class_histogram(self, split: Split | str | None = None) -> list[int]:
        """Return per-class sample counts, optionally restricted to a split."""
        labels = self.labels if split is None else self.labels[self.split_indices(split)]
        return torch.bincount(labels, minlength=self.num_classes).tolist()

    def _content_digest(self) -> str:
        digest = hashlib.sha256()
        digest.update(json.dumps(list(self.images.shape)).encode())
        digest.update(self.images.contiguous().numpy().tobytes())
        digest.update(self.labels.numpy().tobytes())
        digest.update("\n".join(self.split_tags.tolist()).encode())
        return digest.hexdigest()[:16]


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def load_dataset(spec: DatasetSpec) -> LabeledImageDataset:
    """Load a dataset described by ``spec``.

    The source is either a directory with one sub-directory of images per
    class (class index = sorted sub-directory order) or an ``.npz`` archive
    with ``images`` and ``labels`` arrays and an optional line manifest
    ``<stem>.manifest`` next to it.

    Args:
        spec: Data-source descriptor.

    Returns:
        A dataset with intensities in [0, 1] and deterministic split tags.

    Raises:
        DataLoadError: If files are missing or unreadable.
        ShapeError: If images disagree in shape and no resize was requested.
    """
    source = spec.source_path
    if not source.exists():
        raise DataLoadError(f"Dataset source not found: {source}")

    if source.is_dir():
        images, labels, keys, class_names = _read_folder(spec)
    elif source.suffix == ".npz":
        images, labels, keys, class_names = _read_archive(spec)
    else:
        raise DataLoadError(f"Unsupported dataset source (need a directory or .npz): {source}")

    if spec.class_names is not None:
        class_names = spec.class_names
    num_classes = len(class_names) if class_names else int(labels.max()) + 1
    if labels.size and int(labels.max()) >= num_classes:
        raise DataLoadError(f"{source}: label {int(labels.max())} exceeds the class list")

    if spec.split_files is not None:
        split_tags = _splits_from_files(spec.split_files, keys)
    else:
        ratios = spec.split_ratios or DEFAULT_SPLIT_RATIOS
        split_tags = _splits_from_ratios(labels, ratios, spec.seed)

    tensor = torch.from_numpy(images).permute(0, 3, 1, 2).contiguous()
    if spec.image_size is not None and tuple(tensor.shape[2:]) != spec.image_size:
        tensor = F.interpolate(tensor, size=spec.image_size, mode="bilinear", antialias=True)
        tensor = tensor.clamp_(0.0, 1.0)

    dataset = LabeledImageDataset(
        images=tensor,
        labels=torch.from_numpy(labels.astype(np.int64)),
        split_tags=split_tags,
        num_classes=num_classes,
        class_names=tuple(class_names),
    )
    logger.info(
        "Loaded %d samples, %d classes, geometry %s from %s (id %s)",
        len(dataset),
        num_classes,
        dataset.geometry,
        source,
        dataset.dataset_id,
    )
    return dataset


def _to_unit_range(array: np.ndarray, source: Path) -> np.ndarray:
    """Scale an image array to float32 values in [0, 1]."""
    if array.dtype == np.uint8:
        return array.astype(np.float32) / 255.0
    out = array.astype(np.float32)
    if out.size and (float(out.min()) < 0.0 or float(out.max()) > 1.0):
        raise DataLoadError(f"{source}: float images must already lie in [0, 1]")
    return out


def _read_folder(spec: DatasetSpec) -> tuple[np.ndarray, np.ndarray, list[str], tuple[str, ...]]:
    root = spec.source_path
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise DataLoadError(f"No class folders under {root}")

    mode = "L" if spec.channels == 1 else "RGB"
    arrays: list[np.ndarray] = []
    labels: list[int] = []
    keys: list[str] = []
    for label, class_dir in enumerate(class_dirs):
        files = sorted(p for p in class_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
        for path in files:
            try:
                with Image.open(path) as img:
                    img = img.convert(mode)
                    if spec.image_size is not None:
                        height, width = spec.image_size
                        img = img.resize((width, height), Image.Resampling.BILINEAR)
                    array = np.asarray(img, dtype=np.uint8)
            except OSError as e:
                raise DataLoadError(f"Cannot read image {path}: {e}") from e
            if array.ndim == 2:
                array = array[:, :, None]
            if arrays and array.shape != arrays[0].shape:
                raise ShapeError(
                    f"{path} has shape {array.shape}, expected {arrays[0].shape}; "
                    "set image_size to resize"
                )
            arrays.append(array)
            labels.append(label)
            keys.append(path.relative_to(root).as_posix())

    if not arrays:
        raise DataLoadError(f"No images found under {root}")
    images = _to_unit_range(np.stack(arrays), root)
    return images, np.asarray(labels, dtype=np.int64), keys, tuple(d.name for d in class_dirs)


def manifest_path_for(archive: Path) -> Path:
    """Return the manifest path that accompanies an ``.npz`` archive."""
    return archive.with_name(archive.stem + ".manifest")


def _read_archive(spec: DatasetSpec) -> tuple[np.ndarray, np.ndarray, list[str], tuple[str, ...]]:
    path = spec.source_path
    try:
        with np.load(path, allow_pickle=False) as data:
            images = np.array(data["images"])
            labels = np.array(data["labels"]).ravel().astype(np.int64)
            class_names = (
                tuple(str(n) for n in data["class_names"]) if "class_names" in data.files else ()
            )
    except (OSError, ValueError, KeyError) as e:
        raise DataLoadError(f"Cannot read archive {path}: {e}") from e

    if images.ndim == 3:
        images = images[:, :, :, None]
    if images.ndim != 4 or images.shape[0] != labels.shape[0]:
        raise ShapeError(
            f"{path}: images {images.shape} and labels {labels.shape} do not form a dataset"
        )
    if images.shape[3] != spec.channels:
        raise ShapeError(
            f"{path}: archive has {images.shape[3]} channels, expected {spec.channels}"
        )

    manifest = manifest_path_for(path)
    if manifest.exists():
        _check_manifest(manifest, labels)

    return _to_unit_range(images, path), labels, [str(i) for i in range(len(labels))], class_names


def _check_manifest(manifest: Path, labels: np.ndarray) -> None:
    """Verify an archive manifest (``sample_id,label`` lines) against the labels."""
    try:
        lines = manifest.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise DataLoadError(f"Cannot read manifest {manifest}: {e}") from e
    rows = [line.split(",") for line in lines[1:] if line.strip()]
    if len(rows) != len(labels):
        raise DataLoadError(
            f"{manifest} lists {len(rows)} samples but the archive holds {len(labels)}"
        )
    for n, row in enumerate(rows, start=1):
        try:
            sample_id, label = (int(field) for field in row)
            if not 0 <= sample_id < len(labels):
                raise IndexError(f"sample id {sample_id} out of range")
        except (ValueError, IndexError) as e:
            raise DataLoadError(f"{manifest}: malformed row {n}: {e}") from e
        if labels[sample_id] != label:
            raise DataLoadError(f"{manifest}: sample {sample_id} label disagrees with archive")


def _splits_from_ratios(labels: np.ndarray, ratios: dict[str, float], seed: int) -> np.ndarray:
    """Assign split tags per class: floor(ratio * n) to train and val, rest to test."""
    tags = np.full(labels.shape[0], Split.TEST.value, dtype="<U5")
    rng = np.random.default_rng(seed)
    for cls in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == cls))
        n = members.size
        n_train = math.floor(ratios["train"] * n + 1e-9)
        n_val = math.floor(ratios["val"] * n + 1e-9)
        tags[members[:n_train]] = Split.TRAIN.value
        tags[members[n_train : n_train + n_val]] = Split.VAL.value
    return tags


def _splits_from_files(split_files: dict[str, Path], keys: list[str]) -> np.ndarray:
    """Assign split tags from per-split files listing one sample key per line."""
    position = {key: i for i, key in enumerate(keys)}
    tags = np.full(len(keys), "", dtype="<U5")
    for split_name, path in split_files.items():
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise DataLoadError(f"Cannot read split file {path}: {e}") from e
        for line in lines:
            key = line.strip()
            if not key or key.startswith("#"):
                continue
            if key not in position:
                raise DataLoadError(f"{path}: unknown sample '{key}'")
            i = position[key]
            if tags[i]:
                raise DataLoadError(f"{path}: sample '{key}' already tagged '{tags[i]}'")
            tags[i] = split_name
    missing = int((tags == "").sum())
    if missing:
        raise DataLoadError(f"{missing} sample(s) are not listed in any split file")
    return tags
