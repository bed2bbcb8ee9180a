##############################################################################
#
# Name: model_store.py
#
# Function:
#       ModelStore: the on-disk store of checkpoints, per-class subset
#       manifests and the forget-request log
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

import json
import logging
import os
import threading
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any

import torch
from dateutil.parser import isoparse

from unlearn_lab.data.subset import Role, Strategy, SubsetHandle
from unlearn_lab.errors import CheckpointError, DomainError, StoreIntegrityError
from unlearn_lab.model.checkpoint import load_checkpoint, save_checkpoint
from unlearn_lab.model.state import ModelState

logger = logging.getLogger(__name__)

STORE_VERSION = 1


class Action(str, Enum):
    """Kinds of request-log entries."""

    TRAIN = "train"
    DELETE = "delete"
    UNLEARN = "unlearn"
    SKIP = "skip"


@dataclass(frozen=True)
class LogEntry:
    """One line of the forget-request log."""

    seq: int
    timestamp: str
    action: Action
    classes: tuple[int, ...] = ()
    mode: str | None = None
    method: str | None = None
    parent: str | None = None
    result: str | None = None
    count: int = 0
    per_class: tuple[tuple[int, int], ...] = ()
    note: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "timestamp": self.timestamp,
            "action": self.action.value,
            "classes": list(self.classes),
            "mode": self.mode,
            "method": self.method,
            "parent": self.parent,
            "result": self.result,
            "count": self.count,
            "per_class": {str(c): n for c, n in self.per_class},
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> LogEntry:
        return cls(
            seq=int(data["seq"]),
            timestamp=str(data["timestamp"]),
            action=Action(data["action"]),
            classes=tuple(int(c) for c in data.get("classes", ())),
            mode=data.get("mode"),
            method=data.get("method"),
            parent=data.get("parent"),
            result=data.get("result"),
            count=int(data.get("count", 0)),
            per_class=tuple(
                sorted((int(c), int(n)) for c, n in data.get("per_class", {}).items())
            ),
            note=str(data.get("note", "")),
        )


@dataclass(frozen=True)
class StoreSnapshot:
    """Store state derived from the request log alone."""

    current: str | None
    stored_classes: frozenset[int]
    forgotten_classes: frozenset[int]
    checkpoints: frozenset[str] = field(default_factory=frozenset)


class ModelStore:
    """Directory-backed store for one trained model lineage.

    Layout under ``root``::

        store.json                 manifest: checkpoints, subsets, request log
        checkpoints/<digest>.pt    model checkpoints
        subsets/class_<k>.subset   stored subset manifest of class k
        projectors/                projector checkpoints
        progress/<name>.csv        training progress lines

    Mutations are serialized by a lock; every manifest write is atomic.
    """

    MANIFEST_FILE = "store.json"

    Error = StoreIntegrityError

    def __init__(self, root: Path) -> None:
        self._root = root
        self._lock = threading.RLock()
        self._manifest: dict[str, Any] | None = None

    @property
    def root(self) -> Path:
        return self._root

    @property
    def manifest_path(self) -> Path:
        return self._root / self.MANIFEST_FILE

    @property
    def checkpoints_dir(self) -> Path:
        return self._root / "checkpoints"

    @property
    def subsets_dir(self) -> Path:
        return self._root / "subsets"

    @property
    def projectors_dir(self) -> Path:
        return self._root / "projectors"

    @property
    def progress_dir(self) -> Path:
        return self._root / "progress"

    def exists(self) -> bool:
        return self.manifest_path.is_file()

    # -- manifest ------------------------------------------------------------

    @property
    def manifest(self) -> dict[str, Any]:
        """Return the parsed manifest, loading it on first use."""
        if self._manifest is None:
            if not self.exists():
                raise StoreIntegrityError(f"No model store at {self._root}; run 'train' first")
            try:
                with open(self.manifest_path, encoding="utf-8") as f:
                    self._manifest = json.load(f)
            except (OSError, json.JSONDecodeError) as e:
                raise StoreIntegrityError(f"Cannot read {self.manifest_path}: {e}") from e
            if self._manifest.get("version") != STORE_VERSION:
                raise StoreIntegrityError(
                    f"{self.manifest_path}: store version {self._manifest.get('version')} "
                    f"is not {STORE_VERSION}"
                )
        return self._manifest

    def _save(self) -> None:
        data = self.manifest
        self._root.mkdir(parents=True, exist_ok=True)
        tmp = self.manifest_path.with_name(self.MANIFEST_FILE + ".tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2)
            f.write("\n")
        os.replace(tmp, self.manifest_path)

    def _append(self, action: Action, **fields: Any) -> LogEntry:
        log = self.manifest["log"]
        entry = LogEntry(
            seq=len(log) + 1,
            timestamp=datetime.now(timezone.utc).isoformat(),
            action=action,
            **fields,
        )
        log.append(entry.to_dict())
        self._save()
        return entry

    # -- initialization ------------------------------------------------------

    def initialize(
        self,
        model: ModelState,
        subsets: Mapping[int, SubsetHandle],
        *,
        dataset_id: str,
        num_classes: int,
        settings: Mapping[str, Any] | None = None,
        keep_progress: Iterable[str] = (),
    ) -> None:
        """Reset the store to hold an original model and its per-class subsets.

        Checkpoints, subsets, projectors and progress files of an earlier
        run are removed.

        Args:
            model: The original model.
            subsets: Stored subset of each class.
            dataset_id: Id of the dataset the subsets index.
            num_classes: K.
            settings: Experiment settings recorded for provenance.
            keep_progress: Progress sink names already written for this run.
        """
        kept = {self.progress_sink(name).path for name in keep_progress}
        with self._lock:
            for directory in (
                self.checkpoints_dir,
                self.subsets_dir,
                self.projectors_dir,
                self.progress_dir,
            ):
                if directory.is_dir():
                    for path in directory.iterdir():
                        if path not in kept:
                            path.unlink()
            self._manifest = {
                "version": STORE_VERSION,
                "dataset_id": dataset_id,
                "num_classes": num_classes,
                "settings": dict(settings or {}),
                "original": None,
                "current": None,
                "checkpoints": {},
                "subsets": {},
                "forgotten": [],
                "log": [],
            }
            for cls in sorted(subsets):
                handle = subsets[cls]
                path = self.subsets_dir / f"class_{cls}.subset"
                handle.write(path)
                self._manifest["subsets"][str(cls)] = {
                    "path": path.relative_to(self._root).as_posix(),
                    "count": len(handle),
                }
            digest = self._put_checkpoint(model, parent=None, role="original")
            self._manifest["original"] = digest
            self._manifest["current"] = digest
            self._append(
                Action.TRAIN,
                classes=tuple(sorted(subsets)),
                result=digest,
                count=sum(len(h) for h in subsets.values()),
            )
            logger.info(
                "Initialized store %s: original %s, %d stored class subset(s)",
                self._root,
                digest[:12],
                len(subsets),
            )

    def _put_checkpoint(self, model: ModelState, *, parent: str | None, role: str) -> str:
        digest = model.weight_digest
        path = self.checkpoints_dir / f"{digest[:16]}.pt"
        save_checkpoint(model, path)
        self.manifest["checkpoints"][digest] = {
            "path": path.relative_to(self._root).as_posix(),
            "parent": parent,
            "role": role,
        }
        return digest

    # -- queries -------------------------------------------------------------

    @property
    def dataset_id(self) -> str:
        return str(self.manifest["dataset_id"])

    @property
    def num_classes(self) -> int:
        return int(self.manifest["num_classes"])

    @property
    def settings(self) -> dict[str, Any]:
        return dict(self.manifest.get("settings", {}))

    @property
    def original_digest(self) -> str:
        return str(self.manifest["original"])

    @property
    def current_digest(self) -> str:
        return str(self.manifest["current"])

    def resolve_digest(self, prefix: str | None = None) -> str:
        """Expand a digest prefix (or None for the current model).

        Raises:
            DomainError: If the prefix is unknown or ambiguous.
        """
        if prefix is None:
            return self.current_digest
        matches = [d for d in self.manifest["checkpoints"] if d.startswith(prefix)]
        if len(matches) != 1:
            what = "unknown" if not matches else "ambiguous"
            raise DomainError(f"checkpoint digest '{prefix}' is {what}")
        return matches[0]

    def checkpoint(self, digest: str | None = None) -> ModelState:
        """Load a checkpoint (the current one by default).

        Raises:
            StoreIntegrityError: If the file is missing or its digest differs
                from the one it is recorded under.
        """
        full = self.resolve_digest(digest)
        entry = self.manifest["checkpoints"][full]
        try:
            model = load_checkpoint(self._root / entry["path"])
        except CheckpointError as e:
            raise StoreIntegrityError(f"checkpoint {full[:12]}: {e}") from e
        if model.weight_digest != full:
            raise StoreIntegrityError(f"checkpoint file for {full[:12]} holds another model")
        return model

    def stored_classes(self) -> list[int]:
        return sorted(int(c) for c in self.manifest["subsets"])

    def forgotten_classes(self) -> frozenset[int]:
        return frozenset(int(c) for c in self.manifest["forgotten"])

    def subset(self, cls: int) -> SubsetHandle:
        """Read the stored subset manifest of one class.

        Raises:
            DomainError: If the class has no stored subset.
        """
        entry = self.manifest["subsets"].get(str(cls))
        if entry is None:
            raise DomainError(f"class {cls} has no stored subset")
        return SubsetHandle.read(self._root / entry["path"])

    def stored_subset(self, classes: Iterable[int] | None = None) -> SubsetHandle:
        """Return the union of the stored subsets of ``classes`` (default: all)."""
        wanted = self.stored_classes() if classes is None else sorted(set(classes))
        indices: set[int] = set()
        strategy, fraction, seed = Strategy.FULL, 1.0, 0
        for cls in wanted:
            handle = self.subset(cls)
            indices.update(handle.indices)
            strategy, fraction, seed = handle.strategy, handle.fraction, handle.seed
        return SubsetHandle(
            source_dataset_id=self.dataset_id,
            indices=tuple(sorted(indices)),
            strategy=strategy,
            fraction=fraction,
            role=Role.MIXED,
            seed=seed,
        )

    def log_entries(self) -> list[LogEntry]:
        return [LogEntry.from_dict(e) for e in self.manifest["log"]]

    def deleted_count(self, classes: Iterable[int]) -> int:
        """Return how many stored samples of ``classes`` were deleted, per the log."""
        wanted = set(classes)
        per_class: dict[int, int] = {}
        for entry in self.log_entries():
            if entry.action is Action.DELETE:
                per_class.update(entry.per_class)
        return sum(count for cls, count in per_class.items() if cls in wanted)

    # -- mutations -----------------------------------------------------------

    def delete_classes(self, classes: Iterable[int], *, mode: str) -> int:
        """Delete the stored subsets of ``classes`` and log the deletion.

        The log entry is written before any file is removed. Classes
        without a stored subset are ignored.

        Returns:
            Number of deleted sample indices.
        """
        with self._lock:
            present = sorted(c for c in set(classes) if str(c) in self.manifest["subsets"])
            counts = {c: int(self.manifest["subsets"][str(c)]["count"]) for c in present}
            total = sum(counts.values())
            self._append(
                Action.DELETE,
                classes=tuple(present),
                mode=mode,
                count=total,
                per_class=tuple(sorted(counts.items())),
            )
            for cls in present:
                entry = self.manifest["subsets"].pop(str(cls))
                (self._root / entry["path"]).unlink(missing_ok=True)
            self._save()
            logger.info("Deleted stored subsets of classes %s (%d samples)", present, total)
            return total

    def record_unlearn(
        self,
        model: ModelState,
        *,
        classes: Iterable[int],
        mode: str,
        method: str,
        parent: str,
        iterations: int,
    ) -> LogEntry:
        """Store an unlearned checkpoint, make it current and log the request."""
        classes = sorted(set(classes))
        with self._lock:
            digest = self._put_checkpoint(model, parent=parent, role="unlearned")
            forgotten = set(self.manifest["forgotten"]) | set(classes)
            self.manifest["forgotten"] = sorted(forgotten)
            self.manifest["current"] = digest
            return self._append(
                Action.UNLEARN,
                classes=tuple(classes),
                mode=mode,
                method=method,
                parent=parent,
                result=digest,
                count=iterations,
            )

    def record_skip(self, classes: Iterable[int], note: str) -> LogEntry:
        """Log a request that needed no work."""
        with self._lock:
            return self._append(Action.SKIP, classes=tuple(sorted(set(classes))), note=note)

    def progress_sink(self, name: str) -> ProgressFile:
        """Return a line sink writing to ``progress/<name>.csv``."""
        return ProgressFile(self.progress_dir / f"{name}.csv")

    # -- audits --------------------------------------------------------------

    def audit_no_forgotten(self, labels: torch.Tensor) -> None:
        """Check that no stored index carries a forgotten class label.

        Raises:
            StoreIntegrityError: On the first offending class.
        """
        forgotten = self.forgotten_classes()
        for cls in self.stored_classes():
            handle = self.subset(cls)
            if not handle.indices:
                continue
            present = set(labels[list(handle.indices)].tolist())
            leaked = sorted(present & forgotten)
            if leaked:
                raise StoreIntegrityError(
                    f"stored subset of class {cls} still holds forgotten classes {leaked}"
                )

    def replay(self) -> StoreSnapshot:
        """Rebuild the store state from the request log alone.

        Raises:
            StoreIntegrityError: If the log is out of order or inconsistent.
        """
        current: str | None = None
        stored: set[int] = set()
        forgotten: set[int] = set()
        checkpoints: set[str] = set()
        previous = None
        for i, entry in enumerate(self.log_entries(), 1):
            if entry.seq != i:
                raise StoreIntegrityError(f"log entry {i} has sequence number {entry.seq}")
            try:
                stamp = isoparse(entry.timestamp)
            except ValueError as e:
                raise StoreIntegrityError(
                    f"log entry {i}: bad timestamp {entry.timestamp!r}"
                ) from e
            if previous is not None and stamp < previous:
                raise StoreIntegrityError(f"log entry {i} is older than its predecessor")
            previous = stamp

            if entry.action is Action.TRAIN:
                current = entry.result
                stored = set(entry.classes)
                forgotten = set()
                checkpoints = {entry.result} if entry.result else set()
            elif entry.action is Action.DELETE:
                stored -= set(entry.classes)
            elif entry.action is Action.UNLEARN:
                if entry.parent != current:
                    raise StoreIntegrityError(
                        f"log entry {i}: unlearning parent {str(entry.parent)[:12]} "
                        f"is not the current model {str(current)[:12]}"
                    )
                current = entry.result
                forgotten |= set(entry.classes)
                if entry.result:
                    checkpoints.add(entry.result)
        return StoreSnapshot(
            current=current,
            stored_classes=frozenset(stored),
            forgotten_classes=frozenset(forgotten),
            checkpoints=frozenset(checkpoints),
        )

    def verify(self) -> StoreSnapshot:
        """Check the manifest against the replayed log and the files on disk.

        Raises:
            StoreIntegrityError: On any disagreement.
        """
        snapshot = self.replay()
        if snapshot.current != self.manifest["current"]:
            raise StoreIntegrityError("current checkpoint disagrees with the request log")
        if snapshot.stored_classes != frozenset(self.stored_classes()):
            raise StoreIntegrityError("stored classes disagree with the request log")
        if snapshot.forgotten_classes != self.forgotten_classes():
            raise StoreIntegrityError("forgotten classes disagree with the request log")
        for cls in self.stored_classes():
            handle = self.subset(cls)
            if handle.source_dataset_id != self.dataset_id:
                raise StoreIntegrityError(f"subset of class {cls} indexes another dataset")
        for digest in snapshot.checkpoints:
            if digest not in self.manifest["checkpoints"]:
                raise StoreIntegrityError(f"checkpoint {digest[:12]} is logged but not listed")
            self.checkpoint(digest)
        return snapshot


class ProgressFile:
    """Append-only sink for ``epoch,iter,loss,val_acc`` lines."""

    HEADER = "epoch,iter,loss,val_acc"

    def __init__(self, path: Path) -> None:
        self._path = path
        self._lock = threading.Lock()

    @property
    def path(self) -> Path:
        return self._path

    def __call__(self, line: str) -> None:
        with self._lock:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            fresh = not self._path.exists()
            with open(self._path, "a", encoding="utf-8") as f:
                if fresh:
                    f.write(self.HEADER + "\n")
                f.write(line + "\n")
