##############################################################################
#
# Name: test_init_cmd.py
#
# Function:
#       Unit tests for InitCommand class
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

import pytest

from unlearn_lab.app import App
from unlearn_lab.config.experiment import load_experiment
from unlearn_lab.config.manager import ConfigManager
from unlearn_lab.config.validator import SchemaValidator
from unlearn_lab.data.dataset import load_dataset, manifest_path_for


class TestInitCommandFiles:
    """Test the files InitCommand writes."""

    def test_copies_schemas(self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.chdir(tmp_path)
        assert App(args=["init"]).run() == 0

        schemas = tmp_path / ".unlearn-lab" / "schemas"
        assert sorted(p.name for p in schemas.iterdir()) == [
            "dataset.schema.json",
            "experiment.schema.json",
        ]
        copied = json.loads((schemas / "experiment.schema.json").read_text(encoding="utf-8"))
        assert copied == SchemaValidator().load_schema(SchemaValidator.EXPERIMENT_SCHEMA)

    def test_starter_config_is_valid(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """Test the starter experiment passes its own schema."""
        monkeypatch.chdir(tmp_path)
        App(args=["init"]).run()

        data = json.loads((tmp_path / "unlearn-lab.json").read_text(encoding="utf-8"))
        assert data["$schema"] == "./.unlearn-lab/schemas/experiment.schema.json"
        assert data["dataset"]["source_path"] == "data/your-dataset"
        assert data["seeds"] == [1, 2, 3]
        assert SchemaValidator().is_valid(data, SchemaValidator.EXPERIMENT_SCHEMA)

    def test_init_into_new_directory(self, tmp_path: Path) -> None:
        target = tmp_path / "a" / "b"
        assert App(args=["init", str(target)]).run() == 0
        assert (target / "unlearn-lab.json").is_file()

    def test_toy_dataset(self, tmp_path: Path) -> None:
        """Test --toy-dataset writes a loadable archive the config points at."""
        assert App(args=["init", str(tmp_path), "--toy-dataset"]).run() == 0

        archive = tmp_path / "data" / "toy.npz"
        assert archive.is_file()
        assert manifest_path_for(archive).is_file()
        experiment = load_experiment(ConfigManager(tmp_path))
        assert experiment.dataset.source_path == archive
        assert load_dataset(experiment.dataset).num_classes == 10


class TestInitCommandExisting:
    """Test InitCommand against existing files."""

    def test_keeps_existing_config(self, tmp_path: Path) -> None:
        config = tmp_path / "unlearn-lab.json"
        config.write_text('{"dataset": {"source_path": "mine.npz"}}\n', encoding="utf-8")

        App(args=["init", str(tmp_path)]).run()

        assert json.loads(config.read_text(encoding="utf-8")) == {
            "dataset": {"source_path": "mine.npz"}
        }

    def test_force_overwrites(self, tmp_path: Path) -> None:
        config = tmp_path / "unlearn-lab.json"
        config.write_text('{"dataset": {"source_path": "mine.npz"}}\n', encoding="utf-8")

        App(args=["init", str(tmp_path), "--force"]).run()

        assert json.loads(config.read_text(encoding="utf-8"))["subset"]["strategy"] == "mix"


class TestInitCommandGitignore:
    """Test .gitignore handling."""

    def test_creates_gitignore(self, tmp_path: Path) -> None:
        App(args=["init", str(tmp_path)]).run()

        lines = (tmp_path / ".gitignore").read_text(encoding="utf-8").splitlines()
        assert lines == ["# unlearn-lab", ".unlearn-lab/", "runs/"]

    def test_appends_only_missing_patterns(self, tmp_path: Path) -> None:
        gitignore = tmp_path / ".gitignore"
        gitignore.write_text("*.pyc\nruns/\n", encoding="utf-8")

        App(args=["init", str(tmp_path)]).run()
        App(args=["init", str(tmp_path)]).run()

        lines = gitignore.read_text(encoding="utf-8").splitlines()
        assert lines == ["*.pyc", "runs/", "", "# unlearn-lab", ".unlearn-lab/"]
