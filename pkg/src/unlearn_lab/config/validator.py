##############################################################################
#
# Name: validator.py
#
# Function:
#       JSON Schema validation for experiment and dataset files
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

import importlib.resources
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from jsonschema import Draft7Validator

from unlearn_lab.errors import ConfigError

SCHEMA_PACKAGE = "unlearn_lab.resources.schemas"


@dataclass
class ValidationError:
    """A single schema violation."""

    path: str
    message: str

    def __str__(self) -> str:
        if self.path:
            return f"{self.path}: {self.message}"
        return self.message


class SchemaValidator:
    """Validate JSON documents against the bundled schemas."""

    EXPERIMENT_SCHEMA = "experiment"
    DATASET_SCHEMA = "dataset"
    SCHEMAS = (EXPERIMENT_SCHEMA, DATASET_SCHEMA)

    class Error(ConfigError):
        """Raised when a schema or document cannot be loaded."""

        pass

    def __init__(self) -> None:
        self._schemas: dict[str, dict[str, Any]] = {}

    @classmethod
    def schema_file_name(cls, schema_name: str) -> str:
        return f"{schema_name}.schema.json"

    def _get_schema_resource(self, schema_name: str) -> Any:
        if schema_name not in self.SCHEMAS:
            raise self.Error(f"Unknown schema: {schema_name}")
        return importlib.resources.files(SCHEMA_PACKAGE).joinpath(
            self.schema_file_name(schema_name)
        )

    def schema_text(self, schema_name: str) -> str:
        """Return the raw text of a bundled schema (used by ``init``)."""
        try:
            text: str = self._get_schema_resource(schema_name).read_text(encoding="utf-8")
        except OSError as e:
            raise self.Error(f"Failed to read schema '{schema_name}': {e}") from e
        return text

    def load_schema(self, schema_name: str) -> dict[str, Any]:
        """Load and cache a bundled schema.

        Raises:
            Error: If the schema is unknown or unreadable.
        """
        if schema_name in self._schemas:
            return self._schemas[schema_name]
        try:
            schema: dict[str, Any] = json.loads(self.schema_text(schema_name))
        except json.JSONDecodeError as e:
            raise self.Error(f"Failed to load schema '{schema_name}': {e}") from e
        self._schemas[schema_name] = schema
        return schema

    def validate(self, data: Any, schema_name: str) -> list[ValidationError]:
        """Validate ``data`` against a schema.

        Returns:
            The violations, in document order; empty when valid.
        """
        validator = Draft7Validator(self.load_schema(schema_name))
        errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
        return [
            ValidationError(path=".".join(str(p) for p in e.absolute_path), message=e.message)
            for e in errors
        ]

    def validate_file(self, file_path: Path, schema_name: str) -> list[ValidationError]:
        """Validate a JSON file against a schema.

        Raises:
            Error: If the file cannot be read or parsed.
        """
        return self.validate(read_json(file_path), schema_name)

    def is_valid(self, data: Any, schema_name: str) -> bool:
        return not self.validate(data, schema_name)

    def check(self, data: Any, schema_name: str, *, source: str = "") -> None:
        """Raise ``Error`` listing every violation when ``data`` is invalid."""
        errors = self.validate(data, schema_name)
        if errors:
            where = f" in {source}" if source else ""
            details = "\n".join(f"  {e}" for e in errors)
            raise self.Error(f"Invalid {schema_name} configuration{where}:\n{details}")


def read_json(path: Path) -> Any:
    """Read a JSON file, raising ConfigError on I/O or syntax failures."""
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise SchemaValidator.Error(f"Cannot read file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise SchemaValidator.Error(f"Invalid JSON in {path}: {e}") from e
