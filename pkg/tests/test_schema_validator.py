##############################################################################
#
# Name: test_schema_validator.py
#
# Function:
#       Unit tests for SchemaValidator class
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
from pathlib import Path
from typing import Any

import pytest

from unlearn_lab.config.validator import SchemaValidator, ValidationError, read_json


class TestSchemaValidatorLoadSchema:
    """Test schema loading."""

    @pytest.mark.parametrize("name", SchemaValidator.SCHEMAS)
    def test_bundled_schemas_load(self, name: str) -> None:
        """Test every bundled schema has $schema and a description."""
        schema = SchemaValidator().load_schema(name)

        assert "$schema" in schema
        assert "description" in schema
        assert schema["type"] == "object"

    def test_unknown_schema_raises_error(self) -> None:
        with pytest.raises(SchemaValidator.Error, match="Unknown schema"):
            SchemaValidator().load_schema("unknown")

    def test_schema_is_cached(self) -> None:
        validator = SchemaValidator()
        first = validator.load_schema(SchemaValidator.EXPERIMENT_SCHEMA)
        assert validator.load_schema(SchemaValidator.EXPERIMENT_SCHEMA) is first

    def test_schema_text_is_json(self) -> None:
        text = SchemaValidator().schema_text(SchemaValidator.DATASET_SCHEMA)
        assert json.loads(text)["required"] == ["source_path"]


class TestSchemaValidatorExperiment:
    """Test experiment file validation."""

    def test_fixture_tree_is_valid(self, experiment_data: dict[str, Any]) -> None:
        assert SchemaValidator().is_valid(experiment_data, SchemaValidator.EXPERIMENT_SCHEMA)

    def test_dataset_required(self) -> None:
        errors = SchemaValidator().validate({}, SchemaValidator.EXPERIMENT_SCHEMA)

        assert len(errors) == 1
        assert "dataset" in errors[0].message

    def test_unknown_method(self, experiment_data: dict[str, Any]) -> None:
        experiment_data["forget"]["method"] = "erase"
        errors = SchemaValidator().validate(experiment_data, SchemaValidator.EXPERIMENT_SCHEMA)

        assert [e.path for e in errors] == ["forget.method"]

    def test_stop_threshold_is_a_percentage(self, experiment_data: dict[str, Any]) -> None:
        experiment_data["forget"]["budget"]["stop_forget_acc"] = 150
        errors = SchemaValidator().validate(experiment_data, SchemaValidator.EXPERIMENT_SCHEMA)

        assert [e.path for e in errors] == ["forget.budget.stop_forget_acc"]

    def test_unknown_model_key(self, experiment_data: dict[str, Any]) -> None:
        experiment_data["model"]["width"] = 3
        assert not SchemaValidator().is_valid(experiment_data, SchemaValidator.EXPERIMENT_SCHEMA)

    def test_errors_in_document_order(self, experiment_data: dict[str, Any]) -> None:
        experiment_data["subset"] = {"fraction": 2}
        experiment_data["forget"]["mode"] = "dream"
        errors = SchemaValidator().validate(experiment_data, SchemaValidator.EXPERIMENT_SCHEMA)

        assert [e.path for e in errors] == ["forget.mode", "subset.fraction"]

    def test_check_lists_every_violation(self, experiment_data: dict[str, Any]) -> None:
        experiment_data["seeds"] = []
        experiment_data["sweep"] = {"methods": ["xx"]}

        with pytest.raises(SchemaValidator.Error) as excinfo:
            SchemaValidator().check(
                experiment_data, SchemaValidator.EXPERIMENT_SCHEMA, source="exp.json"
            )

        message = str(excinfo.value)
        assert "in exp.json" in message
        assert "seeds" in message
        assert "sweep.methods.0" in message


class TestSchemaValidatorDataset:
    """Test dataset section validation."""

    def test_minimal(self) -> None:
        assert SchemaValidator().is_valid({"source_path": "x.npz"}, SchemaValidator.DATASET_SCHEMA)

    def test_ratios_and_files_exclusive(self) -> None:
        ratios = {"train": 0.8, "val": 0.1, "test": 0.1}
        files = {"train": "a", "val": "b", "test": "c"}
        data = {"source_path": "x", "split_ratios": ratios, "split_files": files}

        assert not SchemaValidator().is_valid(data, SchemaValidator.DATASET_SCHEMA)

    @pytest.mark.parametrize("channels", [1, 3])
    def test_channels(self, channels: int) -> None:
        data = {"source_path": "x", "channels": channels}
        assert SchemaValidator().is_valid(data, SchemaValidator.DATASET_SCHEMA)

    def test_two_channels_rejected(self) -> None:
        data = {"source_path": "x", "channels": 2}
        errors = SchemaValidator().validate(data, SchemaValidator.DATASET_SCHEMA)

        assert [e.path for e in errors] == ["channels"]


class TestValidateFile:
    """Test file-based validation."""

    def test_validate_file(self, tmp_path: Path, experiment_data: dict[str, Any]) -> None:
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(experiment_data), encoding="utf-8")

        assert SchemaValidator().validate_file(path, SchemaValidator.EXPERIMENT_SCHEMA) == []

    def test_invalid_json(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.json"
        path.write_text("{", encoding="utf-8")

        with pytest.raises(SchemaValidator.Error, match="Invalid JSON"):
            read_json(path)

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(SchemaValidator.Error, match="Cannot read"):
            SchemaValidator().validate_file(tmp_path / "nope.json", SchemaValidator.DATASET_SCHEMA)


class TestValidationError:
    """Test ValidationError formatting."""

    def test_with_path(self) -> None:
        assert str(ValidationError(path="a.b", message="bad")) == "a.b: bad"

    def test_without_path(self) -> None:
        assert str(ValidationError(path="", message="bad")) == "bad"
