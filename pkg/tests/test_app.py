##############################################################################
#
# Name: test_app.py
#
# Function:
#       Tests for the App class: argument parsing, exit codes and the
#       train / forget / eval / export / sweep / report workflow
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

import csv
import logging
from pathlib import Path
from unittest.mock import patch

import pytest

from unlearn_lab.__main__ import main
from unlearn_lab.app import (
    EXIT_CONFIG,
    EXIT_DIVERGED,
    EXIT_FAILURE,
    EXIT_INTERRUPTED,
    EXIT_OK,
    EXIT_STORE,
    App,
    exit_code_for,
)
from unlearn_lab.commands.base import CommandError
from unlearn_lab.commands.forget_cmd import parse_classes
from unlearn_lab.config.experiment import STORE_ENV
from unlearn_lab.errors import (
    ConfigError,
    DomainError,
    StoreIntegrityError,
    TrainingDivergedError,
)
from unlearn_lab.model.state import ModelState
from unlearn_lab.store.model_store import Action, ModelStore


def project_store(project_dir: Path) -> ModelStore:
    """The store the fixture project resolves to (output_dir ``runs``)."""
    return ModelStore(project_dir / "runs" / "store")


class TestAppArgumentParsing:
    """Test CLI argument parsing."""

    def test_no_args_returns_none_command(self) -> None:
        assert App(args=[]).args.command is None

    def test_verbose_counts(self) -> None:
        assert App(args=["-vv"]).args.verbose == 2
        assert App(args=[]).args.verbose == 0

    def test_testing_defaults_are_none(self) -> None:
        """Test _testing leaves unset boolean options as None."""
        args = App(args=["init"], _testing=True).args
        assert args.quiet is None
        assert args.force is None
        assert App(args=["init"]).args.force is False

    def test_global_options(self) -> None:
        args = App(args=["--config", "exp.json", "--store", "/s", "train"]).args
        assert args.config == "exp.json"
        assert args.store == "/s"
        assert args.command == "train"

    def test_forget_options(self) -> None:
        args = App(
            args=["forget", "--classes", "0,3", "--method", "ft", "--iters", "5", "--seed", "2"]
        ).args
        assert (args.classes, args.method, args.iters, args.seed) == ("0,3", "ft", 5, 2)
        assert args.mode is None

    def test_export_defaults_to_test_split(self) -> None:
        args = App(args=["export-features", "out.csv"]).args
        assert args.split == "test"
        assert args.checkpoint is None

    def test_report_options(self) -> None:
        args = App(args=["report", "r.jsonl", "--format", "csv", "--title", "T"]).args
        assert (args.records, args.format, args.title) == ("r.jsonl", "csv", "T")

    def test_bad_choice_exits(self) -> None:
        with pytest.raises(SystemExit):
            App(args=["forget", "--mode", "dream"]).run()

    def test_parse_classes(self) -> None:
        assert parse_classes("0, 3,") == [0, 3]
        with pytest.raises(ValueError):
            parse_classes("a")


class TestAppLogging:
    """Test App logging configuration."""

    @pytest.mark.parametrize(
        ("argv", "level"),
        [
            ([], logging.WARNING),
            (["-v"], logging.INFO),
            (["-vv"], logging.DEBUG),
            (["--debug"], logging.DEBUG),
            (["-q"], logging.ERROR),
        ],
    )
    def test_levels(self, argv: list[str], level: int) -> None:
        assert App(args=argv).log.level == level


class TestExitCodes:
    """Test the mapping of errors to exit codes."""

    def test_mapping(self, trained_model: ModelState) -> None:
        assert exit_code_for(ConfigError("x")) == EXIT_CONFIG
        assert exit_code_for(TrainingDivergedError("x", trained_model)) == EXIT_DIVERGED
        assert exit_code_for(StoreIntegrityError("x")) == EXIT_STORE
        assert exit_code_for(DomainError("x")) == EXIT_FAILURE
        assert exit_code_for(CommandError("x", exit_code=7)) == 7

    def test_no_command_prints_help(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert App(args=[]).run() == EXIT_OK
        assert "usage: unlearn-lab" in capsys.readouterr().out

    def test_missing_experiment_file(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.chdir(tmp_path)
        assert App(args=["train"]).run() == EXIT_CONFIG

    def test_invalid_experiment_file(self, project_dir: Path) -> None:
        (project_dir / "unlearn-lab.json").write_text(
            '{"dataset": {"source_path": "x.npz"}, "seeds": []}', encoding="utf-8"
        )
        assert App(args=["train"]).run() == EXIT_CONFIG

    def test_negative_iters(self, project_dir: Path) -> None:
        assert App(args=["forget", "--iters", "-1"]).run() == EXIT_CONFIG

    def test_bad_classes(self, project_dir: Path) -> None:
        assert App(args=["forget", "--classes", "one"]).run() == EXIT_CONFIG

    def test_forget_without_store(self, project_dir: Path) -> None:
        assert App(args=["forget"]).run() == EXIT_STORE

    def test_eval_without_store(self, project_dir: Path) -> None:
        assert App(args=["eval"]).run() == EXIT_STORE

    def test_diverged_training(
        self, project_dir: Path, trained_model: ModelState, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        def diverge(*args: object, **kwargs: object) -> None:
            raise TrainingDivergedError("loss became nan at iteration 3", trained_model)

        monkeypatch.setattr("unlearn_lab.commands.train_cmd.run_train", diverge)
        assert App(args=["train"]).run() == EXIT_DIVERGED

    def test_unexpected_error_returns_one(self) -> None:
        app = App(args=["config"])
        with patch.dict(
            app.COMMANDS,
            {"config": lambda *args: (_ for _ in ()).throw(RuntimeError("Unexpected"))},
        ):
            assert app.run() == EXIT_FAILURE

    def test_unexpected_error_with_debug_raises(self) -> None:
        app = App(args=["--debug", "config"])
        with (
            patch.dict(
                app.COMMANDS,
                {"config": lambda *args: (_ for _ in ()).throw(RuntimeError("Test error"))},
            ),
            pytest.raises(RuntimeError, match="Test error"),
        ):
            app.run()

    def test_main_maps_interrupt(self) -> None:
        with patch.object(App, "run", side_effect=KeyboardInterrupt):
            assert main(["config"]) == EXIT_INTERRUPTED


class TestStoreLocation:
    """Test where commands put the model store."""

    def test_output_dir_default(self, project_dir: Path) -> None:
        assert App(args=["train"]).run() == EXIT_OK
        assert project_store(project_dir).exists()

    def test_cli_store_wins_over_env(
        self, project_dir: Path, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setenv(STORE_ENV, str(tmp_path / "from-env"))
        assert App(args=["--store", str(tmp_path / "from-cli"), "train"]).run() == EXIT_OK

        assert ModelStore(tmp_path / "from-cli").exists()
        assert not (tmp_path / "from-env").exists()

    def test_env_store(
        self, project_dir: Path, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setenv(STORE_ENV, str(tmp_path / "from-env"))
        assert App(args=["train"]).run() == EXIT_OK
        assert ModelStore(tmp_path / "from-env").exists()


class TestAppWorkflow:
    """Run the commands in sequence against the fixture project."""

    def test_train_forget_eval_export(
        self, project_dir: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        assert App(args=["train"]).run() == EXIT_OK
        assert "Original model" in capsys.readouterr().out
        store = project_store(project_dir)
        original = store.original_digest

        assert App(args=["forget", "--classes", "1", "--iters", "5"]).run() == EXIT_OK
        assert "forgot classes [1]" in capsys.readouterr().out
        assert store.forgotten_classes() == frozenset({1})
        assert store.log_entries()[-1].count == 5

        assert App(args=["forget", "--classes", "1"]).run() == EXIT_OK
        assert "already forgotten" in capsys.readouterr().out
        assert store.log_entries()[-1].action is Action.SKIP

        assert App(args=["eval", "--checkpoint", original[:10]]).run() == EXIT_OK
        assert original[:12] in capsys.readouterr().out

        assert App(args=["eval", "--scope", "stored_subset"]).run() == EXIT_OK

        out = project_dir / "features.csv"
        assert App(args=["export-features", str(out), "--split", "val"]).run() == EXIT_OK
        with open(out, encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
        assert len(rows) == 1 + 16
        assert {row[2] for row in rows[1:]} == {"retain", "forget"}

    def test_generated_forget(self, project_dir: Path) -> None:
        assert App(args=["train"]).run() == EXIT_OK
        assert App(args=["forget", "--classes", "2", "--mode", "generated"]).run() == EXIT_OK

        entry = project_store(project_dir).log_entries()[-1]
        assert entry.mode == "generated"
        assert entry.method == "rl"

    def test_synthetic_mode_with_finetune(self, project_dir: Path) -> None:
        App(args=["train"]).run()
        assert App(args=["forget", "--method", "ft", "--mode", "noise"]).run() == EXIT_CONFIG

    def test_unknown_checkpoint(self, project_dir: Path) -> None:
        App(args=["train"]).run()
        assert App(args=["eval", "--checkpoint", "zz"]).run() == EXIT_FAILURE

    def test_sweep_then_report(
        self, project_dir: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        assert App(args=["sweep"]).run() == EXIT_OK
        assert (project_dir / "runs" / "sweep" / "records.jsonl").is_file()
        capsys.readouterr()

        assert App(args=["report", "--format", "markdown", "--title", "Toy"]).run() == EXIT_OK
        markdown = capsys.readouterr().out
        assert markdown.startswith("## Toy")
        assert "| Metric | Original | RT mix | FT mix | RL mix |" in markdown

        assert App(args=["report", "--format", "csv"]).run() == EXIT_OK
        assert capsys.readouterr().out.splitlines()[0].startswith("metric,Original")

    def test_report_without_records(self, project_dir: Path) -> None:
        assert App(args=["report"]).run() == EXIT_FAILURE
