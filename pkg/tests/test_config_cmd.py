##############################################################################
#
# Name: test_config_cmd.py
#
# Function:
#       Unit tests for ConfigCommand class
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


def read(path: Path) -> dict[str, object]:
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.fixture
def user_config(isolated_user_dirs: Path) -> Path:
    """Path of the user config file (not created)."""
    return isolated_user_dirs / "config" / "config.json"


class TestConfigCommandGet:
    """Test ConfigCommand get operation."""

    def test_get_missing_key(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """Test a missing key warns but does not fail."""
        monkeypatch.chdir(tmp_path)
        assert App(args=["config", "nonexistent.key"]).run() == 0
        assert capsys.readouterr().out == ""

    def test_get_from_project_file(
        self, project_dir: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        assert App(args=["config", "subset.strategy"]).run() == 0
        assert capsys.readouterr().out.strip() == "mix"

    def test_project_overrides_user(
        self, project_dir: Path, user_config: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        user_config.parent.mkdir(parents=True)
        user_config.write_text(json.dumps({"subset": {"strategy": "top"}}), encoding="utf-8")

        App(args=["config", "subset.strategy"]).run()

        assert capsys.readouterr().out.strip() == "mix"

    def test_get_dict_prints_json(
        self, project_dir: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        App(args=["config", "forget.budget"]).run()

        printed = json.loads(capsys.readouterr().out)
        assert printed["max_iterations"] == 10

    def test_explicit_config_file(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
    ) -> None:
        other = tmp_path / "elsewhere" / "exp.json"
        other.parent.mkdir()
        other.write_text(json.dumps({"seeds": [4, 5]}), encoding="utf-8")
        monkeypatch.chdir(tmp_path)

        App(args=["--config", str(other), "config", "seeds"]).run()

        assert json.loads(capsys.readouterr().out) == [4, 5]


class TestConfigCommandSet:
    """Test ConfigCommand set operation."""

    def test_set_user_value(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch, user_config: Path
    ) -> None:
        monkeypatch.chdir(tmp_path)
        assert App(args=["config", "store.root", "/data/lab-store"]).run() == 0

        assert read(user_config) == {"store": {"root": "/data/lab-store"}}

    @pytest.mark.parametrize(
        ("raw", "expected"),
        [("0.25", 0.25), ("300", 300), ("true", True), ("[1, 2]", [1, 2]), ("top", "top")],
    )
    def test_values_parsed_as_json(
        self,
        raw: str,
        expected: object,
        tmp_path: Path,
        monkeypatch: pytest.MonkeyPatch,
        user_config: Path,
    ) -> None:
        monkeypatch.chdir(tmp_path)
        App(args=["config", "a.b", raw]).run()

        assert read(user_config) == {"a": {"b": expected}}

    def test_set_project_value_keeps_other_keys(self, project_dir: Path) -> None:
        App(args=["config", "subset.fraction", "0.2", "--project"]).run()

        data = read(project_dir / "unlearn-lab.json")
        assert data["subset"] == {"fraction": 0.2, "strategy": "mix"}
        assert data["seeds"] == [1]

    def test_project_set_leaves_user_file_alone(
        self, project_dir: Path, user_config: Path
    ) -> None:
        App(args=["config", "seeds", "[7]", "--project"]).run()
        assert not user_config.exists()


class TestConfigCommandUnset:
    """Test ConfigCommand --unset."""

    def test_unset_project_value(self, project_dir: Path) -> None:
        assert App(args=["config", "subset.strategy", "--unset", "--project"]).run() == 0

        assert read(project_dir / "unlearn-lab.json")["subset"] == {"fraction": 0.1}

    def test_unset_missing_key(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch, user_config: Path
    ) -> None:
        monkeypatch.chdir(tmp_path)
        assert App(args=["config", "store.root", "--unset"]).run() == 0
        assert not user_config.exists()


class TestConfigCommandList:
    """Test ConfigCommand list operation."""

    def test_list_empty(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
    ) -> None:
        monkeypatch.chdir(tmp_path)
        App(args=["config", "--list"]).run()

        assert "No configuration values set" in capsys.readouterr().out

    def test_list_merges_user_and_project(
        self, project_dir: Path, user_config: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        user_config.parent.mkdir(parents=True)
        user_config.write_text(
            json.dumps({"store": {"root": "/s"}, "seeds": [9]}), encoding="utf-8"
        )

        App(args=["config", "--list"]).run()
        merged = json.loads(capsys.readouterr().out)

        assert merged["store"] == {"root": "/s"}
        assert merged["seeds"] == [1]
        assert merged["subset"]["strategy"] == "mix"


class TestConfigCommandNoArgs:
    """Test ConfigCommand with no arguments."""

    def test_no_args_shows_usage(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
    ) -> None:
        monkeypatch.chdir(tmp_path)
        assert App(args=["config"]).run() == 0
        assert "Usage: unlearn-lab config" in capsys.readouterr().out
