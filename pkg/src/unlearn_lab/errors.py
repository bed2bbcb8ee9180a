##############################################################################
#
# Name: errors.py
#
# Function:
#       Exception hierarchy shared by the unlearn_lab library modules
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from unlearn_lab.model.state import ModelState


class UnlearnLabError(Exception):
    """Base class for all errors raised by unlearn_lab."""

    pass


class DomainError(UnlearnLabError):
    """Raised when arguments are outside the operation's domain."""

    pass


class ConfigError(UnlearnLabError):
    """Raised for invalid or inconsistent configuration."""

    pass


class DataLoadError(UnlearnLabError):
    """Raised when a dataset source cannot be read."""

    pass


class ShapeError(UnlearnLabError):
    """Raised when image geometry does not match what is expected."""

    pass


class ExportError(UnlearnLabError):
    """Raised when an output file cannot be written."""

    pass


class TrainingDivergedError(UnlearnLabError):
    """Raised when the training loss becomes non-finite.

    Attributes:
        last_state: The last ModelState whose loss was finite.
    """

    def __init__(self, message: str, last_state: ModelState) -> None:
        super().__init__(message)
        self.last_state = last_state


class CheckpointError(UnlearnLabError):
    """Base class for checkpoint read/write failures."""

    pass


class CheckpointCorruptError(CheckpointError):
    """Raised when a checkpoint is truncated or its digest does not verify."""

    pass


class UnsupportedVersionError(CheckpointError):
    """Raised when a checkpoint has a format version we cannot read."""

    def __init__(self, found: int, supported: int) -> None:
        super().__init__(
            f"Unsupported checkpoint format version {found} "
            f"(this build reads version {supported})"
        )
        self.found = found
        self.supported = supported


class InvariantViolationError(UnlearnLabError):
    """Raised when an internal invariant check fails."""

    pass


class ContractViolationError(UnlearnLabError):
    """Raised when an input that must stay untouched was modified."""

    pass


class StoreIntegrityError(UnlearnLabError):
    """Raised when the model store's manifests or log disagree."""

    pass
