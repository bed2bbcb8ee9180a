##############################################################################
#
# Name: subset.py
#
# Function:
#       SubsetHandle value type and its line-oriented manifest format
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

from bisect import bisect_left
from collections.abc import Iterable
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from unlearn_lab.errors import DataLoadError, DomainError


class Strategy(str, Enum):
    """How a subset was chosen from the confidence ranking."""

    RANDOM = "random"
    TOP = "top"
    BOTTOM = "bottom"
    MIX = "mix"
    FULL = "full"


class Role(str, Enum):
    """What a subset holds relative to a class partition."""

    RETAIN = "retain"
    FORGET = "forget"
    MIXED = "mixed"


@dataclass(frozen=True)
class SubsetHandle:
    """Sorted, duplicate-free indices into one dataset.

    The manifest form is a header line
    ``dataset_id,strategy,fraction,seed[,role]`` followed by one index per
    line. ``fraction`` is written with ``repr`` so it reads back bit-exact.
    """

    source_dataset_id: str
    indices: tuple[int, ...]
    strategy: Strategy
    fraction: float
    role: Role = Role.MIXED
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.fraction <= 1.0:
            raise DomainError(f"fraction must lie in (0, 1], got {self.fraction}")
        if "," in self.source_dataset_id or "\n" in self.source_dataset_id:
            raise DomainError("dataset id may not contain commas or newlines")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise DomainError("subset indices must be sorted and unique")
        if self.indices and self.indices[0] < 0:
            raise DomainError("subset indices must be non-negative")

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, index: object) -> bool:
        if not isinstance(index, int):
            return False
        pos = bisect_left(self.indices, index)
        return pos < len(self.indices) and self.indices[pos] == index

    def restrict(self, keep: Iterable[int], role: Role) -> SubsetHandle:
        """Return the handle limited to indices in ``keep``, tagged ``role``."""
        wanted = set(keep)
        return replace(self, indices=tuple(i for i in self.indices if i in wanted), role=role)

    def union(self, other: SubsetHandle, role: Role = Role.MIXED) -> SubsetHandle:
        """Merge two handles over the same dataset."""
        if other.source_dataset_id != self.source_dataset_id:
            raise DomainError("cannot merge subsets of different datasets")
        merged = tuple(sorted(set(self.indices) | set(other.indices)))
        return replace(self, indices=merged, role=role)

    def to_manifest(self) -> str:
        """Render the manifest text."""
        header = (
            f"{self.source_dataset_id},{self.strategy.value},{self.fraction!r},"
            f"{self.seed},{self.role.value}"
        )
        return "\n".join([header, *(str(i) for i in self.indices)]) + "\n"

    @classmethod
    def from_manifest(cls, text: str) -> SubsetHandle:
        """Parse manifest text.

        Raises:
            DataLoadError: If the text is not a valid manifest.
        """
        lines = text.splitlines()
        if not lines:
            raise DataLoadError("empty subset manifest")
        fields = lines[0].split(",")
        if len(fields) not in (4, 5):
            raise DataLoadError(f"bad subset manifest header: {lines[0]!r}")
        try:
            return cls(
                source_dataset_id=fields[0],
                strategy=Strategy(fields[1]),
                fraction=float(fields[2]),
                seed=int(fields[3]),
                role=Role(fields[4]) if len(fields) == 5 else Role.MIXED,
                indices=tuple(int(line) for line in lines[1:] if line.strip()),
            )
        except (ValueError, DomainError) as e:
            raise DataLoadError(f"bad subset manifest: {e}") from e

    def write(self, path: Path) -> None:
        """Write the manifest to ``path``."""
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.to_manifest())

    @classmethod
    def read(cls, path: Path) -> SubsetHandle:
        """Read a manifest from ``path``."""
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise DataLoadError(f"Cannot read subset manifest {path}: {e}") from e
        return cls.from_manifest(text)
